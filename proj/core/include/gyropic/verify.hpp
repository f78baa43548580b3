// Verification studies on the analytic benchmark fields: time-step
// convergence tables, stiff/limit consistency in eps, and the damping of
// the perpendicular velocity.
#pragma once

#include <string>
#include <vector>

#include "gyropic/pusher.hpp"

namespace gyropic {

struct StudyRow {
  double param = 0.0;  // dt or eps
  double error = 0.0;
};

struct StudyResult {
  std::string name;
  std::vector<StudyRow> rows;
  double slope = 0.0;         // least-squares log-log fit over all rows
  double slope_target = 0.0;
  double slope_tol = 0.0;
  bool pass = false;          // |slope - target| <= tol and finite errors
};

// Global error at T=1 of the scheme against a fine reference (RK4 on the
// stiff system for SI schemes, tiny-step limit RK4 for the drift schemes)
// on the radial-trap benchmark, x0=(5,0,0), v0=(4,3,2). Every dt must
// divide T evenly. Errors use the scaled state norm over (x, eperp, vpar).
StudyResult convergence_study(Scheme scheme, double eps,
                              const std::vector<double>& dts);

// The dt list the convergence bands were pinned on for each scheme.
std::vector<double> default_dt_list(Scheme s);
// eps the drift-scheme tables run at (the stiff ones use eps = 1).
double default_convergence_eps(Scheme s);

// Deviation between the stiff scheme and the matching drift scheme from
// well-prepared data (v_perp0 = -eps F^perp(x0)): max over t <= T=1 of the
// scaled state norm. Expected to shrink like eps^2.
StudyResult epsilon_consistency_study(int order, double dt,
                                      const std::vector<double>& eps_list);

// Half-decade ladder 1e-3 .. 1e-6 used for the pinned consistency bands.
std::vector<double> default_consistency_eps();

// |v_perp| after nsteps of the scheme at fixed dt as a function of eps;
// in the damped regime the magnitude is proportional to eps.
StudyResult vperp_damping_study(Scheme scheme, double dt, int nsteps,
                                const std::vector<double>& eps_list);

// Header `param,error,slope`; one row per table entry.
void write_study_csv(const StudyResult& r, const std::string& path);

// "PASS name: slope=... target=...+/-..." (or FAIL).
std::string study_summary_line(const StudyResult& r);

}  // namespace gyropic
