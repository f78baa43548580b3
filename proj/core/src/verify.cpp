// Study harness shared by the CLI and the acceptance checks.
#include "gyropic/verify.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gyropic {

namespace {

const Vec3 kX0{5.0, 0.0, 0.0};
const Vec3 kV0{4.0, 3.0, 2.0};
constexpr double kHorizon = 1.0;

struct Scales {
  double x[3];
  double e;
  double v;
};

Scales scales_from(const Vec3& x0, double e0, double v0) {
  auto mag = [](double a) { return a != 0.0 ? std::abs(a) : 1.0; };
  return {{mag(x0.x), mag(x0.y), mag(x0.z)}, mag(e0), mag(v0)};
}

double scaled_distance(const Scales& s, const Vec3& xa, double ea, double va,
                       const Vec3& xb, double eb, double vb) {
  const double dx = (xa.x - xb.x) / s.x[0];
  const double dy = (xa.y - xb.y) / s.x[1];
  const double dz = (xa.z - xb.z) / s.x[2];
  const double de = (ea - eb) / s.e;
  const double dv = (va - vb) / s.v;
  return std::sqrt(dx * dx + dy * dy + dz * dz + de * de + dv * dv);
}

long checked_steps(double dt) {
  const double n = kHorizon / dt;
  const long nl = std::lround(n);
  if (nl < 1 || std::abs(n - nl) > 1e-9)
    throw std::invalid_argument(
        "study dt must divide the horizon T=1 evenly");
  return nl;
}

double lsq_loglog_slope(const std::vector<StudyRow>& rows) {
  const size_t n = rows.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const StudyRow& r : rows) {
    const double x = std::log(r.param);
    const double y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void finish(StudyResult& r, double target, double tol) {
  r.slope_target = target;
  r.slope_tol = tol;
  bool finite = !r.rows.empty();
  for (const StudyRow& row : r.rows)
    finite = finite && std::isfinite(row.error) && row.error > 0.0;
  r.slope = finite ? lsq_loglog_slope(r.rows) : 0.0;
  r.pass = finite && std::abs(r.slope - target) <= tol;
}

double order_tol(int order) {
  switch (order) {
    case 1: return 0.15;
    case 2: return 0.2;
    default: return 0.3;
  }
}

}  // namespace

std::vector<double> default_dt_list(Scheme s) {
  // The first-order and third-order tables tolerate the coarse 0.1 start;
  // the second-order ones only reach their asymptotic range from 0.05.
  switch (s) {
    case Scheme::SI2:
    case Scheme::Limit1:
    case Scheme::Limit2:
    case Scheme::Limit3:
      return {0.05, 0.025, 0.0125, 0.00625};
    default:
      return {0.1, 0.05, 0.025, 0.0125};
  }
}

double default_convergence_eps(Scheme s) {
  return is_limit_scheme(s) ? 1e-2 : 1.0;
}

StudyResult convergence_study(Scheme scheme, double eps,
                              const std::vector<double>& dts) {
  if (dts.size() < 4)
    throw std::invalid_argument("convergence study needs >= 4 dt entries");
  const RadialTrapField field;
  StudyResult res;
  res.name = "convergence " + to_string(scheme);

  double dt_min = dts[0];
  for (double dt : dts) dt_min = std::min(dt_min, dt);
  const double dt_ref = dt_min / 100.0;
  const long n_ref = std::lround(kHorizon / dt_ref);

  const double e0 = 0.5 * norm2(kV0.xy());
  const Scales sc = scales_from(kX0, e0, kV0.z);

  Vec3 ref_x;
  double ref_e, ref_v;
  if (is_limit_scheme(scheme)) {
    DriftState r{kX0, e0, kV0.z};
    for (long i = 0; i < n_ref; ++i)
      r = step_rk4_limit(field, eps, i * dt_ref, dt_ref, r);
    ref_x = r.x;
    ref_e = r.eperp;
    ref_v = r.vpar;
  } else {
    AugState r{kX0, kV0, e0};
    for (long i = 0; i < n_ref; ++i)
      r = step_rk4(field, eps, i * dt_ref, dt_ref, r);
    ref_x = r.x;
    ref_e = r.eperp;
    ref_v = r.v.z;
  }

  for (double dt : dts) {
    const long n = checked_steps(dt);
    double err;
    if (is_limit_scheme(scheme)) {
      DriftState s{kX0, e0, kV0.z};
      for (long i = 0; i < n; ++i)
        s = step_drift(scheme, field, eps, i * dt, dt, s);
      err = scaled_distance(sc, s.x, s.eperp, s.vpar, ref_x, ref_e, ref_v);
    } else {
      AugState s{kX0, kV0, e0};
      for (long i = 0; i < n; ++i)
        s = step_aug(scheme, field, eps, i * dt, dt, s);
      err = scaled_distance(sc, s.x, s.eperp, s.v.z, ref_x, ref_e, ref_v);
    }
    res.rows.push_back({dt, err});
  }
  finish(res, scheme_order(scheme), order_tol(scheme_order(scheme)));
  return res;
}

std::vector<double> default_consistency_eps() {
  std::vector<double> out;
  for (int i = 0; i <= 6; ++i) out.push_back(std::pow(10.0, -3.0 - 0.5 * i));
  return out;
}

StudyResult epsilon_consistency_study(int order, double dt,
                                      const std::vector<double>& eps_list) {
  if (order < 1 || order > 3)
    throw std::invalid_argument("consistency order must be 1, 2, or 3");
  const RadialTrapField field;
  const Scheme si = order == 1 ? Scheme::SI1
                   : order == 2 ? Scheme::SI2
                                : Scheme::SI3;
  const Scheme lim = order == 1 ? Scheme::Limit1
                    : order == 2 ? Scheme::Limit2
                                 : Scheme::Limit3;
  StudyResult res;
  res.name = "eps-consistency order " + std::to_string(order);
  const long n = checked_steps(dt);

  for (double eps : eps_list) {
    // Well-prepared start: the perpendicular velocity sits on the drift
    // manifold, v_perp = -eps F^perp, so no O(1) gyro-transient remains.
    const Vec3 e_field = field.E(0.0, kX0);
    const Vec2 f_perp = e_field.xy() / field.b(kX0.xy());
    const Vec2 vp0 = -eps * perp(f_perp);
    const double e0 = 0.5 * norm2(vp0);
    const Scales sc = scales_from(kX0, e0, kV0.z);

    AugState a{kX0, Vec3{vp0, kV0.z}, e0};
    DriftState d{kX0, e0, kV0.z};
    double dev = scaled_distance(sc, a.x, a.eperp, a.v.z, d.x, d.eperp, d.vpar);
    for (long i = 0; i < n; ++i) {
      a = step_aug(si, field, eps, i * dt, dt, a);
      d = step_drift(lim, field, eps, i * dt, dt, d);
      dev = std::max(dev, scaled_distance(sc, a.x, a.eperp, a.v.z, d.x,
                                          d.eperp, d.vpar));
    }
    res.rows.push_back({eps, dev});
  }
  finish(res, 2.0, 0.3);
  return res;
}

StudyResult vperp_damping_study(Scheme scheme, double dt, int nsteps,
                                const std::vector<double>& eps_list) {
  const RadialTrapField field;
  StudyResult res;
  res.name = "vperp damping " + to_string(scheme);
  for (double eps : eps_list) {
    AugState s{kX0, kV0, 0.5 * norm2(kV0.xy())};
    for (int i = 0; i < nsteps; ++i)
      s = step_aug(scheme, field, eps, i * dt, dt, s);
    res.rows.push_back({eps, norm(s.v.xy())});
  }
  finish(res, 1.0, 0.2);
  return res;
}

void write_study_csv(const StudyResult& r, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "param,error,slope\n");
  for (const StudyRow& row : r.rows)
    std::fprintf(f, "%.17g,%.17g,%.17g\n", row.param, row.error, r.slope);
  std::fclose(f);
}

std::string study_summary_line(const StudyResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %s: slope=%.3f target=%.1f+/-%.2f",
                r.pass ? "PASS" : "FAIL", r.name.c_str(), r.slope,
                r.slope_target, r.slope_tol);
  return buf;
}

}  // namespace gyropic
