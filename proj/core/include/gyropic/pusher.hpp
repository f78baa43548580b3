// Semi-implicit particle pushers for motion in a strong axial magnetic
// field B = b(x,y)/eps * e_z, and their drift (guiding-center) limits.
//
// The stiff characteristic system is augmented with the perpendicular
// energy e_perp so that the eps -> 0 limit of each scheme is a consistent
// discretization of the drift equations:
//
//   dx/dt      = v
//   de_perp/dt = <E_perp, v_perp>
//   dv/dt      = H(t, x, v_perp, e_perp) - b(x,y) v_perp^perp / eps
//
// with H = E - chi(e_perp, v_perp) grad_perp(ln b). Only the rotation term
// is implicit; every stage reduces to one 2x2 solve (rotation_solve).
//
// Schemes: SI1/SI2/SI3 (orders 1-3 in dt, uniformly stable in eps),
// Limit1/Limit2/Limit3 (the matching guiding-center schemes), and classical
// RK4 on either system as a reference.
#pragma once

#include <string>

#include "gyropic/fields.hpp"
#include "gyropic/vec.hpp"

namespace gyropic {

enum class Scheme { SI1, SI2, SI3, Limit1, Limit2, Limit3, RK4, RK4Limit };

Scheme scheme_from_string(const std::string& name);
std::string to_string(Scheme s);
bool is_limit_scheme(Scheme s);
// Formal order of accuracy in dt (4 for the RK4 references).
int scheme_order(Scheme s);

// State advanced by the stiff schemes.
struct AugState {
  Vec3 x;
  Vec3 v;
  double eperp = 0.0;  // auxiliary perpendicular energy, e_perp(0) = |v_perp(0)|^2/2
};

// State advanced by the drift-limit schemes.
struct DriftState {
  Vec3 x;
  double eperp = 0.0;
  double vpar = 0.0;
};

struct PushOptions {
  // Stage-time pairing for the two off-step stages of SI3. "printed" keeps
  // the published pairing (t^{n+1} for stage 3, t^{n+1/2} for stage 4);
  // "uniform" swaps them to match the limit scheme. Identical results for
  // time-independent fields.
  bool si3_uniform_stage_times = false;
};

// Energy limiter: interpolates between e_perp and the kinetic perpendicular
// energy q = |v_perp|^2/2,
//   chi = e_perp/(e_perp + q) * max(0, e_perp - q),  chi(0,0) = 0.
// Satisfies chi(q, v_perp) = 0, chi(e,0) = e, 0 <= chi <= e_perp.
double chi(double eperp, const Vec2& vperp);

// Solves v + lam * v^perp = rhs (z passes through). Contracts the
// transverse part: |v_perp| = |rhs_perp| / sqrt(1 + lam^2).
Vec3 rotation_solve(double lam, const Vec3& rhs);

// Non-stiff force H = E - chi * grad_perp(ln b).
Vec3 force_field(const Field& f, double t, const Vec3& x, const Vec2& vperp,
                 double eperp);

// Guiding-center velocity
//   U_perp = -eps * (F_perp - (e_perp/b^2) grad_perp b)^perp,  U_z = vpar,
// with F = E/b (E x B drift plus grad-B drift).
Vec3 guiding_center_velocity(const Field& f, double t, const Vec3& x,
                             double eperp, double vpar, double eps);

// div(F_perp^perp) for F = E/b; closed form -(-E_y db/dx + E_x db/dy)/b^2.
// Source of the drift-limit e_perp equation: de_perp/dt = eps * div * e_perp.
double perp_force_divergence(const Field& f, double t, const Vec3& x);

AugState step_si1(const Field& f, double eps, double t, double dt, const AugState& s);
AugState step_si2(const Field& f, double eps, double t, double dt, const AugState& s);
AugState step_si3(const Field& f, double eps, double t, double dt, const AugState& s,
                  const PushOptions& opt = {});
// Classical RK4 on (x, v); e_perp is slaved to |v_perp|^2/2.
AugState step_rk4(const Field& f, double eps, double t, double dt, const AugState& s);

DriftState step_limit1(const Field& f, double eps, double t, double dt, const DriftState& s);
DriftState step_limit2(const Field& f, double eps, double t, double dt, const DriftState& s);
DriftState step_limit3(const Field& f, double eps, double t, double dt, const DriftState& s);
// Classical RK4 on (x, e_perp, v_par).
DriftState step_rk4_limit(const Field& f, double eps, double t, double dt, const DriftState& s);

// Dispatch on the scheme enum. step_aug accepts SI1/SI2/SI3/RK4,
// step_drift accepts Limit1/Limit2/Limit3/RK4Limit; anything else throws.
AugState step_aug(Scheme s, const Field& f, double eps, double t, double dt,
                  const AugState& st, const PushOptions& opt = {});
DriftState step_drift(Scheme s, const Field& f, double eps, double t, double dt,
                      const DriftState& st);

}  // namespace gyropic
