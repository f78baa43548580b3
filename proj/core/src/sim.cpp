// Case setup and the deposit -> solve -> push loop.
#include "gyropic/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <thread>

#include "gyropic/poisson.hpp"
#include "gyropic/pusher.hpp"

namespace gyropic {

namespace {

constexpr const char* kVersion = "gyropic 0.1.0";
constexpr double kTwoPi = 6.2831853071795864769;

// Grid electric field read through shape-function interpolation; the
// magnetic intensity stays analytic.
class GridField final : public Field {
 public:
  GridField(const Field& bprof, const FieldState& f,
            const GridClassification& cl, ShapeSpec spec)
      : bprof_(bprof), f_(f), cl_(cl), spec_(spec) {}

  Vec3 E(double, const Vec3& x) const override {
    return interpolate_E(f_.E, f_.grid, cl_, spec_, x);
  }
  double b(const Vec2& p) const override { return bprof_.b(p); }
  Vec2 grad_b(const Vec2& p) const override { return bprof_.grad_b(p); }

 private:
  const Field& bprof_;
  const FieldState& f_;
  const GridClassification& cl_;
  ShapeSpec spec_;
};

std::unique_ptr<Field> case_b_profile(const CaseConfig& c) {
  switch (c.kind) {
    case CaseKind::SingleParticle:
      return std::make_unique<RadialTrapField>();
    case CaseKind::Diocotron:
      return std::make_unique<UniformBField>(1.0);
    case CaseKind::DShape:
      return std::make_unique<DShapeBField>();
  }
  return nullptr;
}

long step_count(const CaseConfig& c) {
  return static_cast<long>(std::ceil(c.t_final / c.dt - 1e-9));
}

long interval_stride(double interval, double dt) {
  if (interval <= 0.0) return 1;
  const long s = std::lround(interval / dt);
  return s < 1 ? 1 : s;
}

struct CsvFile {
  std::FILE* f = nullptr;
  explicit CsvFile(const std::string& path) {
    f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
  }
  ~CsvFile() {
    if (f) std::fclose(f);
  }
};

void run_threaded(long n, int threads, const std::function<void(long, long)>& fn) {
  if (threads <= 1 || n < 2) {
    fn(0, n);
    return;
  }
  const long nt = std::min<long>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (long t = 0; t < nt; ++t)
    pool.emplace_back([&fn, t, n, nt] { fn(n * t / nt, n * (t + 1) / nt); });
  for (auto& th : pool) th.join();
}

RunSummary run_single(const CaseConfig& c) {
  RunSummary sum;
  const RadialTrapField field;
  const PushOptions opt{c.si3_uniform_stage_times};
  const long nsteps = step_count(c);
  const long dstride = interval_stride(c.diag_interval, c.dt);
  const bool limit = is_limit_scheme(c.scheme);

  AugState aug{c.x0, c.v0, 0.5 * norm2(c.v0.xy())};
  DriftState drift{c.x0, 0.5 * norm2(c.v0.xy()), c.v0.z};

  CsvFile traj(c.output_dir + "/trajectory.csv");
  std::fprintf(traj.f, "t,x,y,z,vx,vy,vz,eperp\n");
  DiagnosticsWriter dw(c.output_dir + "/diagnostics.csv");

  auto state_x = [&] { return limit ? drift.x : aug.x; };
  auto state_v = [&] {
    return limit ? Vec3{0.0, 0.0, drift.vpar} : aug.v;
  };
  auto state_e = [&] { return limit ? drift.eperp : aug.eperp; };

  auto write_traj = [&](double t) {
    const Vec3 x = state_x(), v = state_v();
    std::fprintf(traj.f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                 t, x.x, x.y, x.z, v.x, v.y, v.z, state_e());
  };
  auto emit = [&](double t) {
    DiagnosticsRecord r;
    r.t = t;
    const Vec3 v = state_v();
    r.ek_aug = state_e() + 0.5 * v.z * v.z;
    r.ek_raw = 0.5 * norm2(v);
    r.ep = 0.0;
    r.et = r.ek_aug;
    r.mu = state_e() / field.b(state_x().xy());
    dw.append(r);
    sum.records.push_back(r);
  };

  write_traj(0.0);
  emit(0.0);
  for (long n = 0; n < nsteps; ++n) {
    const double t = n * c.dt;
    if (limit)
      drift = step_drift(c.scheme, field, c.eps, t, c.dt, drift);
    else
      aug = step_aug(c.scheme, field, c.eps, t, c.dt, aug, opt);
    write_traj((n + 1) * c.dt);
    if ((n + 1) % dstride == 0 || n + 1 == nsteps) emit((n + 1) * c.dt);
  }
  sum.steps = nsteps;
  sum.realized_t = nsteps * c.dt;
  return sum;
}

RunSummary run_pic(const CaseConfig& c) {
  RunSummary sum;
  const DomainSpec dom = case_domain(c);
  const Grid3 g = case_grid(c, dom);
  PoissonSolver solver(g, dom);
  const GridClassification& cl = solver.classification();
  const std::unique_ptr<Field> bprof = case_b_profile(c);
  const ShapeSpec spec{1};
  const PushOptions opt{c.si3_uniform_stage_times};
  const bool limit = is_limit_scheme(c.scheme);

  Rng rng(c.seed);
  std::vector<ParticleState> particles = sample_initial(c, rng);
  double charge0 = 0.0;
  for (const auto& p : particles) charge0 += p.w;

  FieldState f(g);
  const GridField sampler(*bprof, f, cl, spec);
  DiagnosticsWriter dw(c.output_dir + "/diagnostics.csv");

  const long nsteps = step_count(c);
  const long dstride = interval_stride(c.diag_interval, c.dt);
  const long sstride = interval_stride(c.snapshot_interval, c.dt);
  const bool snapshots = c.snapshot_interval > 0.0;

  double lost_total = 0.0;
  auto deposit_and_solve = [&] {
    const DepositStats st =
        deposit(particles, g, cl, spec, f.rho, c.threads);
    lost_total += st.lost;
    if (c.rho0 != 0.0) {
      for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.xy.ny; ++j)
          for (int i = 0; i < g.xy.nx; ++i)
            if (cl.at(i, j) == NodeLabel::Interior)
              f.rho[g.index(i, j, k)] -= c.rho0;
    }
    solver.solve(f);
  };
  auto emit = [&](double t) {
    const EnergyBreakdown e = energy(particles, f, cl);
    DiagnosticsRecord r;
    r.t = t;
    r.ek_aug = e.ek_aug;
    r.ek_raw = e.ek_raw;
    r.ep = e.ep;
    r.et = e.et;
    r.mu = adiabatic(particles, *bprof);
    r.charge_lost = charge0 > 0.0 ? lost_total / charge0 : 0.0;
    dw.append(r);
    sum.records.push_back(r);
  };
  auto snapshot = [&](long step) {
    char name[64];
    std::snprintf(name, sizeof name, "/rho_%06ld.dat", step);
    write_grid_snapshot(c.output_dir + name, g, f.rho);
  };
  auto push_all = [&](double t) {
    run_threaded(static_cast<long>(particles.size()), c.threads,
                 [&](long lo, long hi) {
                   for (long i = lo; i < hi; ++i) {
                     ParticleState& p = particles[i];
                     if (limit) {
                       DriftState s{p.x, p.eperp, p.v.z};
                       s = step_drift(c.scheme, sampler, c.eps, t, c.dt, s);
                       p.x = s.x;
                       p.eperp = s.eperp;
                       p.v = {0.0, 0.0, s.vpar};
                     } else {
                       AugState s{p.x, p.v, p.eperp};
                       s = step_aug(c.scheme, sampler, c.eps, t, c.dt, s, opt);
                       p.x = s.x;
                       p.v = s.v;
                       p.eperp = s.eperp;
                     }
                   }
                 });
  };

  deposit_and_solve();
  emit(0.0);
  if (snapshots) snapshot(0);

  for (long n = 0; n < nsteps; ++n) {
    push_all(n * c.dt);
    // Drop particles that crossed the section boundary, keeping order.
    const size_t before = particles.size();
    std::erase_if(particles, [&](const ParticleState& p) {
      return !contains(dom, p.x.xy());
    });
    sum.removed += static_cast<long>(before - particles.size());
    const double lz = g.lz();
    for (auto& p : particles)
      p.x.z -= lz * std::floor((p.x.z - g.z0) / lz);
    deposit_and_solve();
    if ((n + 1) % dstride == 0 || n + 1 == nsteps) emit((n + 1) * c.dt);
    if (snapshots && (n + 1) % sstride == 0) snapshot(n + 1);
  }
  sum.steps = nsteps;
  sum.realized_t = nsteps * c.dt;
  return sum;
}

}  // namespace

DomainSpec case_domain(const CaseConfig& c) {
  switch (c.kind) {
    case CaseKind::SingleParticle:
      // The analytic trap is only defined for r < 10.
      return DomainSpec::disk({0.0, 0.0}, 10.0, c.lz);
    case CaseKind::Diocotron:
      return DomainSpec::disk({0.0, 0.0}, c.disk_radius, c.lz);
    case CaseKind::DShape:
      return DomainSpec::dshape({0.0, 0.0}, c.dshape_r0, c.lz);
  }
  return DomainSpec::disk({0.0, 0.0}, 1.0, 1.0);
}

Grid3 case_grid(const CaseConfig& c, const DomainSpec& dom) {
  const Box2 bb = bounding_box(dom);
  Grid3 g;
  g.xy.nx = c.nx;
  g.xy.ny = c.ny;
  // Two-cell margin outside the section box so every boundary point has a
  // ghost layer around it.
  g.xy.dx = (bb.hi.x - bb.lo.x) / (c.nx - 5);
  g.xy.dy = (bb.hi.y - bb.lo.y) / (c.ny - 5);
  g.xy.x0 = bb.lo.x - 2.0 * g.xy.dx;
  g.xy.y0 = bb.lo.y - 2.0 * g.xy.dy;
  g.z0 = 0.0;
  g.nz = c.nz;
  g.dz = c.lz / c.nz;
  return g;
}

std::vector<ParticleState> sample_initial(const CaseConfig& c, Rng& rng) {
  std::vector<ParticleState> out;
  out.reserve(static_cast<size_t>(c.n_particles));

  if (c.kind == CaseKind::SingleParticle) {
    ParticleState p;
    p.x = c.x0;
    p.v = c.v0;
    p.eperp = 0.5 * norm2(p.v.xy());
    p.w = 1.0;
    out.push_back(p);
    return out;
  }

  // Density n0 * shape(x) with shape <= envelope on the proposal box.
  Box2 box;
  double envelope = 0.0;
  std::function<double(const Vec3&)> shape;
  const DomainSpec dom = case_domain(c);
  if (c.kind == CaseKind::Diocotron) {
    box = {{-c.r2, -c.r2}, {c.r2, c.r2}};
    envelope = 1.0 + 6.0 * c.alpha;
    shape = [&c](const Vec3& x) {
      const double r = norm(x.xy());
      if (r < c.r1 || r > c.r2) return 0.0;
      return 1.0 + c.alpha * (x.x / r +
                              5.0 * std::cos(kTwoPi * c.kz * x.z / c.lz));
    };
  } else {
    box = bounding_box(dom);
    // Spatial density left by the Maxwellian velocity integral:
    // n = n0(z) [G+ + G-] / (2 sqrt(2 pi) r0^2).
    const double norm2d =
        1.0 / (2.0 * std::sqrt(kTwoPi) * c.gauss_r0 * c.gauss_r0);
    envelope = (1.0 + c.alpha) * 2.0 * norm2d;
    shape = [&c, &dom, norm2d](const Vec3& x) {
      if (!contains(dom, x.xy())) return 0.0;
      const Vec2 dplus = x.xy() - c.gauss_x0;
      const Vec2 dminus = x.xy() + c.gauss_x0;
      const double s2 = 2.0 * c.gauss_r0 * c.gauss_r0;
      const double blobs =
          std::exp(-norm2(dplus) / s2) + std::exp(-norm2(dminus) / s2);
      return (1.0 + c.alpha * std::cos(kTwoPi * c.kz * x.z / c.lz)) * blobs *
             norm2d;
    };
  }

  long proposals = 0;
  while (out.size() < static_cast<size_t>(c.n_particles)) {
    const Vec3 x{rng.uniform(box.lo.x, box.hi.x),
                 rng.uniform(box.lo.y, box.hi.y), rng.uniform(0.0, c.lz)};
    ++proposals;
    if (rng.uniform(0.0, envelope) < shape(x)) {
      ParticleState p;
      p.x = x;
      p.v = {rng.gauss(), rng.gauss(), rng.gauss()};
      p.eperp = 0.5 * norm2(p.v.xy());
      out.push_back(p);
    }
    if (proposals >= 200000 &&
        static_cast<double>(out.size()) / proposals < 1e-4)
      throw RejectionStall(static_cast<double>(out.size()) / proposals);
  }

  const double rate = static_cast<double>(out.size()) / proposals;
  const double vbox =
      (box.hi.x - box.lo.x) * (box.hi.y - box.lo.y) * c.lz;
  const double total =
      c.n0_means_total ? c.n0 : c.n0 * envelope * vbox * rate;
  const double w = total / static_cast<double>(c.n_particles);
  for (auto& p : out) p.w = w;
  return out;
}

RunSummary run_case(const CaseConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(c.output_dir);
  {
    CsvFile meta(c.output_dir + "/run.meta");
    const std::string echo = config_echo(c, kVersion);
    std::fwrite(echo.data(), 1, echo.size(), meta.f);
  }
  RunSummary sum =
      c.kind == CaseKind::SingleParticle ? run_single(c) : run_pic(c);
  sum.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return sum;
}

}  // namespace gyropic
