// Microbenchmarks for the per-step hot paths: charge deposition, field
// interpolation, one pusher step per scheme family, and a full embedded
// boundary solve at the production grid size.
#include <benchmark/benchmark.h>

#include <vector>

#include "gyropic/pic.hpp"
#include "gyropic/poisson.hpp"
#include "gyropic/fields.hpp"
#include "gyropic/pusher.hpp"
#include "gyropic/sim.hpp"

namespace {

using namespace gyropic;

CaseConfig bench_config(long n_particles) {
  ConfigMap m;
  m.set("run.case", "diocotron");
  m.set("run.n_particles", std::to_string(n_particles));
  return resolve_config(m);
}

struct Fixture {
  CaseConfig c;
  DomainSpec dom;
  Grid3 grid;
  GridClassification cl;
  std::vector<ParticleState> parts;

  explicit Fixture(long n) : c(bench_config(n)), dom(case_domain(c)) {
    grid = case_grid(c, dom);
    cl = classify(grid.xy, dom);
    Rng rng(c.seed);
    parts = sample_initial(c, rng);
  }
};

void BM_Deposit(benchmark::State& state) {
  Fixture f(100000);
  const ShapeSpec spec{static_cast<int>(state.range(0))};
  std::vector<double> rho(f.grid.size());
  for (auto _ : state) {
    deposit(f.parts, f.grid, f.cl, spec, rho);
    benchmark::DoNotOptimize(rho.data());
  }
  state.SetItemsProcessed(state.iterations() * f.parts.size());
}
BENCHMARK(BM_Deposit)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_InterpolateE(benchmark::State& state) {
  Fixture f(100000);
  const ShapeSpec spec{1};
  std::vector<Vec3> E(f.grid.size(), Vec3{1.0, -0.5, 0.25});
  for (auto _ : state) {
    Vec3 acc{};
    for (const ParticleState& p : f.parts)
      acc = acc + interpolate_E(E, f.grid, f.cl, spec, p.x);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * f.parts.size());
}
BENCHMARK(BM_InterpolateE)->Unit(benchmark::kMillisecond);

void BM_PushStep(benchmark::State& state) {
  const Scheme scheme = static_cast<Scheme>(state.range(0));
  const RadialTrapField field;
  const double eps = 0.01;
  const double dt = 0.1;
  AugState s{{5.0, 0.0, 0.0}, {4.0, 3.0, 2.0}, 12.5};
  double t = 0.0;
  for (auto _ : state) {
    s = step_aug(scheme, field, eps, t, dt, s, {});
    t += dt;
    if (norm2(s.x.xy()) > 400.0) {
      s = AugState{{5.0, 0.0, 0.0}, {4.0, 3.0, 2.0}, 12.5};
      t = 0.0;
    }
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PushStep)
    ->Arg(static_cast<int>(Scheme::SI1))
    ->Arg(static_cast<int>(Scheme::SI3))
    ->Arg(static_cast<int>(Scheme::RK4));

void BM_PushStepDrift(benchmark::State& state) {
  const RadialTrapField field;
  const double eps = 0.01;
  const double dt = 0.1;
  DriftState s{{5.0, 0.0, 0.0}, 12.5, 2.0};
  double t = 0.0;
  for (auto _ : state) {
    s = step_drift(Scheme::Limit3, field, eps, t, dt, s);
    t += dt;
    if (norm2(s.x.xy()) > 400.0) {
      s = DriftState{{5.0, 0.0, 0.0}, 12.5, 2.0};
      t = 0.0;
    }
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_PushStepDrift);

void BM_PoissonSolve(benchmark::State& state) {
  Fixture f(100000);
  PoissonSolver solver(f.grid, f.dom);
  const ShapeSpec spec{1};
  FieldState fs(f.grid);
  deposit(f.parts, f.grid, f.cl, spec, fs.rho);
  for (auto _ : state) {
    FieldState work = fs;
    solver.solve(work);
    benchmark::DoNotOptimize(work.phi.data());
  }
}
BENCHMARK(BM_PoissonSolve)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
