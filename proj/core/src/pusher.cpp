#include "gyropic/pusher.hpp"

#include <cmath>
#include <stdexcept>

namespace gyropic {

namespace {

// Second-order scheme: smallest root of g^2 - 2g + 1/2 = 0.
const double kGamma2 = 1.0 - 1.0 / std::sqrt(2.0);

// Third-order four-stage SDIRK coefficients.
constexpr double kAlpha = 0.24169426078821;
constexpr double kBeta = kAlpha / 4.0;
constexpr double kEta = 0.12915286960590;
constexpr double kGamma3 = 0.5 - kAlpha - kBeta - kEta;

Vec2 eperp_of(const Vec3& e) { return e.xy(); }

}  // namespace

Scheme scheme_from_string(const std::string& name) {
  if (name == "SI1") return Scheme::SI1;
  if (name == "SI2") return Scheme::SI2;
  if (name == "SI3") return Scheme::SI3;
  if (name == "LIMIT1") return Scheme::Limit1;
  if (name == "LIMIT2") return Scheme::Limit2;
  if (name == "LIMIT3") return Scheme::Limit3;
  if (name == "RK4") return Scheme::RK4;
  if (name == "RK4LIMIT") return Scheme::RK4Limit;
  throw std::invalid_argument("unknown scheme '" + name +
                              "' (expected SI1|SI2|SI3|LIMIT1|LIMIT2|LIMIT3|RK4|RK4LIMIT)");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::SI1: return "SI1";
    case Scheme::SI2: return "SI2";
    case Scheme::SI3: return "SI3";
    case Scheme::Limit1: return "LIMIT1";
    case Scheme::Limit2: return "LIMIT2";
    case Scheme::Limit3: return "LIMIT3";
    case Scheme::RK4: return "RK4";
    case Scheme::RK4Limit: return "RK4LIMIT";
  }
  return "?";
}

bool is_limit_scheme(Scheme s) {
  return s == Scheme::Limit1 || s == Scheme::Limit2 || s == Scheme::Limit3 ||
         s == Scheme::RK4Limit;
}

int scheme_order(Scheme s) {
  switch (s) {
    case Scheme::SI1:
    case Scheme::Limit1: return 1;
    case Scheme::SI2:
    case Scheme::Limit2: return 2;
    case Scheme::SI3:
    case Scheme::Limit3: return 3;
    case Scheme::RK4:
    case Scheme::RK4Limit: return 4;
  }
  return 0;
}

double chi(double eperp, const Vec2& vperp) {
  const double q = 0.5 * norm2(vperp);
  const double den = eperp + q;
  if (den == 0.0) return 0.0;
  const double excess = eperp - q;
  return excess > 0.0 ? (eperp / den) * excess : 0.0;
}

Vec3 rotation_solve(double lam, const Vec3& rhs) {
  const double d = 1.0 + lam * lam;
  return {(rhs.x + lam * rhs.y) / d, (rhs.y - lam * rhs.x) / d, rhs.z};
}

Vec3 force_field(const Field& f, double t, const Vec3& x, const Vec2& vperp,
                 double eperp) {
  const Vec3 e = f.E(t, x);
  const Vec2 g = f.grad_ln_b(x.xy());
  const double c = chi(eperp, vperp);
  return {e.x - c * g.x, e.y - c * g.y, e.z};
}

Vec3 guiding_center_velocity(const Field& f, double t, const Vec3& x,
                             double eperp, double vpar, double eps) {
  const Vec3 e = f.E(t, x);
  const double b = f.b(x.xy());
  const Vec2 gb = f.grad_b(x.xy());
  const Vec2 fp = e.xy() / b;
  const Vec2 u = -eps * perp(fp - (eperp / (b * b)) * gb);
  return {u, vpar};
}

double perp_force_divergence(const Field& f, double t, const Vec3& x) {
  const Vec3 e = f.E(t, x);
  const double b = f.b(x.xy());
  const Vec2 gb = f.grad_b(x.xy());
  return -(-e.y * gb.x + e.x * gb.y) / (b * b);
}

AugState step_si1(const Field& f, double eps, double t, double dt,
                  const AugState& s) {
  const Vec3 en = f.E(t, s.x);
  const double bn = f.b(s.x.xy());
  const Vec3 h = force_field(f, t, s.x, s.v.xy(), s.eperp);

  AugState out;
  out.v = rotation_solve(dt * bn / eps, s.v + dt * h);
  out.eperp = s.eperp + dt * dot(eperp_of(en), out.v.xy());
  out.x = s.x + dt * out.v;
  return out;
}

AugState step_si2(const Field& f, double eps, double t, double dt,
                  const AugState& s) {
  const double g = kGamma2;
  const Vec3 en = f.E(t, s.x);
  const double b1 = f.b(s.x.xy());
  const Vec3 h1 = force_field(f, t, s.x, s.v.xy(), s.eperp);

  const Vec3 v1 = rotation_solve(g * dt * b1 / eps, s.v + g * dt * h1);
  const Vec3 f1 = h1 - (b1 / eps) * perp(v1);
  const double w1 = dot(eperp_of(en), v1.xy());

  // Intermediate state at t + dt/(2 gamma).
  const double th = t + dt / (2.0 * g);
  const Vec3 xh = s.x + (dt / (2.0 * g)) * v1;
  const double eh = s.eperp + (dt / (2.0 * g)) * w1;
  const Vec3 vh = s.v + (dt / (2.0 * g)) * f1;

  const double b2 = f.b(xh.xy());
  const Vec3 h2 = force_field(f, th, xh, vh.xy(), eh);
  const Vec3 v2 =
      rotation_solve(g * dt * b2 / eps, s.v + dt * (1.0 - g) * f1 + g * dt * h2);
  const double w2 = dot(eperp_of(f.E(th, xh)), v2.xy());

  AugState out;
  out.x = s.x + dt * ((1.0 - g) * v1 + g * v2);
  out.eperp = s.eperp + dt * ((1.0 - g) * w1 + g * w2);
  out.v = v2;
  return out;
}

AugState step_si3(const Field& f, double eps, double t, double dt,
                  const AugState& s, const PushOptions& opt) {
  const Vec3 en = f.E(t, s.x);
  const double b12 = f.b(s.x.xy());
  const Vec3 h12 = force_field(f, t, s.x, s.v.xy(), s.eperp);
  const double lam12 = kAlpha * dt * b12 / eps;

  const Vec3 v1 = rotation_solve(lam12, s.v + kAlpha * dt * h12);
  const Vec3 f1 = h12 - (b12 / eps) * perp(v1);

  const Vec3 v2 = rotation_solve(lam12, s.v - kAlpha * dt * f1 + kAlpha * dt * h12);
  const Vec3 f2 = h12 - (b12 / eps) * perp(v2);
  const double w2 = dot(eperp_of(en), v2.xy());

  // Stage 3 at x + dt*v2; published pairing evaluates it at t + dt.
  const double t3 = opt.si3_uniform_stage_times ? t + 0.5 * dt : t + dt;
  const Vec3 x2 = s.x + dt * v2;
  const double e2 = s.eperp + dt * w2;
  const Vec3 vh2 = s.v + dt * f2;

  const double b3 = f.b(x2.xy());
  const Vec3 h3 = force_field(f, t3, x2, vh2.xy(), e2);
  const Vec3 v3 =
      rotation_solve(kAlpha * dt * b3 / eps, s.v + (1.0 - kAlpha) * dt * f2 + kAlpha * dt * h3);
  const Vec3 f3 = h3 - (b3 / eps) * perp(v3);
  const double w3 = dot(eperp_of(f.E(t3, x2)), v3.xy());

  // Stage 4 at the Simpson midpoint state; published pairing uses t + dt/2.
  const double t4 = opt.si3_uniform_stage_times ? t + dt : t + 0.5 * dt;
  const Vec3 x3 = s.x + 0.25 * dt * (v2 + v3);
  const double e3 = s.eperp + 0.25 * dt * (w2 + w3);
  const Vec3 vh3 = s.v + 0.25 * dt * (f2 + f3);

  const double b4 = f.b(x3.xy());
  const Vec3 h4 = force_field(f, t4, x3, vh3.xy(), e3);
  const Vec3 v4 = rotation_solve(
      kAlpha * dt * b4 / eps,
      s.v + dt * (kBeta * f1 + kEta * f2 + kGamma3 * f3) + kAlpha * dt * h4);
  const Vec3 f4 = h4 - (b4 / eps) * perp(v4);
  const double w4 = dot(eperp_of(f.E(t4, x3)), v4.xy());

  AugState out;
  out.x = s.x + (dt / 6.0) * (v2 + v3 + 4.0 * v4);
  out.eperp = s.eperp + (dt / 6.0) * (w2 + w3 + 4.0 * w4);
  out.v = s.v + (dt / 6.0) * (f2 + f3 + 4.0 * f4);
  return out;
}

AugState step_rk4(const Field& f, double eps, double t, double dt,
                  const AugState& s) {
  const auto acc = [&](double tt, const Vec3& x, const Vec3& v) {
    return f.E(tt, x) - (f.b(x.xy()) / eps) * perp(v);
  };
  const Vec3 k1x = s.v;
  const Vec3 k1v = acc(t, s.x, s.v);
  const Vec3 k2x = s.v + 0.5 * dt * k1v;
  const Vec3 k2v = acc(t + 0.5 * dt, s.x + 0.5 * dt * k1x, s.v + 0.5 * dt * k1v);
  const Vec3 k3x = s.v + 0.5 * dt * k2v;
  const Vec3 k3v = acc(t + 0.5 * dt, s.x + 0.5 * dt * k2x, s.v + 0.5 * dt * k2v);
  const Vec3 k4x = s.v + dt * k3v;
  const Vec3 k4v = acc(t + dt, s.x + dt * k3x, s.v + dt * k3v);

  AugState out;
  out.x = s.x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.v = s.v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  out.eperp = 0.5 * norm2(out.v.xy());
  return out;
}

DriftState step_limit1(const Field& f, double eps, double t, double dt,
                       const DriftState& s) {
  const double ez = f.E(t, s.x).z;
  DriftState out;
  out.vpar = s.vpar + dt * ez;
  out.x = s.x + dt * guiding_center_velocity(f, t, s.x, s.eperp, out.vpar, eps);
  out.eperp = s.eperp * (1.0 + eps * dt * perp_force_divergence(f, t, s.x));
  return out;
}

DriftState step_limit2(const Field& f, double eps, double t, double dt,
                       const DriftState& s) {
  const double g = kGamma2;
  const double ezn = f.E(t, s.x).z;
  const double dn = perp_force_divergence(f, t, s.x);

  const double vpar1 = s.vpar + g * dt * ezn;
  const Vec3 un = guiding_center_velocity(f, t, s.x, s.eperp, vpar1, eps);

  const double th = t + dt / (2.0 * g);
  const Vec3 xh = s.x + (dt / (2.0 * g)) * un;
  const double eh = s.eperp + (eps * dt / (2.0 * g)) * s.eperp * dn;

  DriftState out;
  out.vpar = s.vpar + dt * ((1.0 - g) * ezn + g * f.E(th, xh).z);
  const Vec3 uh = guiding_center_velocity(f, th, xh, eh, out.vpar, eps);
  out.x = s.x + dt * ((1.0 - g) * un + g * uh);
  out.eperp =
      s.eperp + eps * dt * ((1.0 - g) * s.eperp * dn +
                            g * eh * perp_force_divergence(f, th, xh));
  return out;
}

DriftState step_limit3(const Field& f, double eps, double t, double dt,
                       const DriftState& s) {
  const double ezn = f.E(t, s.x).z;
  const double dn = perp_force_divergence(f, t, s.x);
  const Vec3 un = guiding_center_velocity(f, t, s.x, s.eperp, s.vpar, eps);

  const double t2 = t + 0.5 * dt;
  const Vec3 x2 = s.x + dt * un;
  const double e2 = s.eperp + eps * dt * s.eperp * dn;
  const double ez2 = f.E(t2, x2).z;
  const double d2 = perp_force_divergence(f, t2, x2);

  const double vpar3 = s.vpar + dt * ((1.0 - kAlpha) * ezn + kAlpha * ez2);
  const Vec3 u2 = guiding_center_velocity(f, t2, x2, e2, vpar3, eps);

  const double t3 = t + dt;
  const Vec3 x3 = s.x + 0.25 * dt * (un + u2);
  const double e3 = s.eperp + 0.25 * eps * dt * (s.eperp * dn + e2 * d2);
  const double ez3 = f.E(t3, x3).z;
  const double d3 = perp_force_divergence(f, t3, x3);

  // Stage-4 parallel velocity: the z-component of the stiff scheme's fourth
  // stage, including the diagonally-implicit alpha term, so the coefficients
  // sum to 1/2 and third order is retained.
  const double vpar4 =
      s.vpar + dt * ((kBeta + kEta) * ezn + kGamma3 * ez2 + kAlpha * ez3);
  const Vec3 u3 = guiding_center_velocity(f, t3, x3, e3, vpar4, eps);

  DriftState out;
  out.x = s.x + (dt / 6.0) * (un + u2 + 4.0 * u3);
  out.eperp =
      s.eperp + (eps * dt / 6.0) * (s.eperp * dn + e2 * d2 + 4.0 * e3 * d3);
  out.vpar = s.vpar + (dt / 6.0) * (ezn + ez2 + 4.0 * ez3);
  return out;
}

DriftState step_rk4_limit(const Field& f, double eps, double t, double dt,
                          const DriftState& s) {
  struct Rhs {
    Vec3 xdot;
    double edot;
    double vdot;
  };
  const auto rhs = [&](double tt, const DriftState& y) {
    Rhs r;
    r.xdot = guiding_center_velocity(f, tt, y.x, y.eperp, y.vpar, eps);
    r.edot = eps * perp_force_divergence(f, tt, y.x) * y.eperp;
    r.vdot = f.E(tt, y.x).z;
    return r;
  };
  const auto advance = [](const DriftState& y, double h, const Rhs& k) {
    return DriftState{y.x + h * k.xdot, y.eperp + h * k.edot, y.vpar + h * k.vdot};
  };
  const Rhs k1 = rhs(t, s);
  const Rhs k2 = rhs(t + 0.5 * dt, advance(s, 0.5 * dt, k1));
  const Rhs k3 = rhs(t + 0.5 * dt, advance(s, 0.5 * dt, k2));
  const Rhs k4 = rhs(t + dt, advance(s, dt, k3));

  DriftState out;
  out.x = s.x + (dt / 6.0) * (k1.xdot + 2.0 * k2.xdot + 2.0 * k3.xdot + k4.xdot);
  out.eperp = s.eperp + (dt / 6.0) * (k1.edot + 2.0 * k2.edot + 2.0 * k3.edot + k4.edot);
  out.vpar = s.vpar + (dt / 6.0) * (k1.vdot + 2.0 * k2.vdot + 2.0 * k3.vdot + k4.vdot);
  return out;
}

AugState step_aug(Scheme s, const Field& f, double eps, double t, double dt,
                  const AugState& st, const PushOptions& opt) {
  switch (s) {
    case Scheme::SI1: return step_si1(f, eps, t, dt, st);
    case Scheme::SI2: return step_si2(f, eps, t, dt, st);
    case Scheme::SI3: return step_si3(f, eps, t, dt, st, opt);
    case Scheme::RK4: return step_rk4(f, eps, t, dt, st);
    default: throw std::invalid_argument("step_aug: " + to_string(s) + " is not a stiff scheme");
  }
}

DriftState step_drift(Scheme s, const Field& f, double eps, double t, double dt,
                      const DriftState& st) {
  switch (s) {
    case Scheme::Limit1: return step_limit1(f, eps, t, dt, st);
    case Scheme::Limit2: return step_limit2(f, eps, t, dt, st);
    case Scheme::Limit3: return step_limit3(f, eps, t, dt, st);
    case Scheme::RK4Limit: return step_rk4_limit(f, eps, t, dt, st);
    default: throw std::invalid_argument("step_drift: " + to_string(s) + " is not a limit scheme");
  }
}

}  // namespace gyropic
