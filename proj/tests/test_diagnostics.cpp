// Energy/adiabatic reductions, relative variation, and the CSV format.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gyropic/diagnostics.hpp"
#include "gyropic/rng.hpp"

using namespace gyropic;

namespace {

// Disk of radius 1 on a grid spanning [-1.2, 1.2]^2, nz planes.
struct DiskSetup {
  DomainSpec dom;
  Grid3 g;
  GridClassification cl;

  explicit DiskSetup(int n, int nz = 2)
      : dom(DomainSpec::disk({0.0, 0.0}, 1.0, 1.0)) {
    const double h = 2.4 / (n - 1);
    g.xy = {-1.2, -1.2, h, h, n, n};
    g.z0 = 0.0;
    g.nz = nz;
    g.dz = 1.0 / nz;
    cl = classify(g.xy, dom);
  }

  int interior_count() const {
    int m = 0;
    for (int j = 0; j < g.xy.ny; ++j)
      for (int i = 0; i < g.xy.nx; ++i)
        if (cl.at(i, j) == NodeLabel::Interior) ++m;
    return m;
  }
};

// Field energy of E = x_perp (1 - r^2) on the unit disk: the integrand
// r^2 (1-r^2)^2 / 2 vanishes at the rim, so the node-indicator Riemann
// sum converges at second order. Exact value pi/24 per unit length.
double rim_vanishing_ep(int n) {
  DiskSetup su(n, 1);
  FieldState f(su.g);
  for (int j = 0; j < su.g.xy.ny; ++j)
    for (int i = 0; i < su.g.xy.nx; ++i) {
      const Vec2 p = su.g.xy.node(i, j);
      const double fac = 1.0 - norm2(p);
      f.E[su.g.index(i, j, 0)] = {p.x * fac, p.y * fac, 0.0};
    }
  return field_energy(f, su.cl);
}

}  // namespace

TEST_CASE("energy splits into augmented kinetic and field parts") {
  DiskSetup su(17);
  FieldState f(su.g);
  std::vector<ParticleState> ps(1);
  ps[0].x = {0.1, 0.0, 0.25};
  ps[0].v = {0.0, 0.0, 3.0};
  ps[0].eperp = 2.0;
  ps[0].w = 1.0;
  const EnergyBreakdown e = energy(ps, f, su.cl);
  CHECK(e.ek_aug == doctest::Approx(6.5).epsilon(1e-15));
  CHECK(e.ek_raw == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(e.ep == 0.0);
  CHECK(e.et == doctest::Approx(6.5).epsilon(1e-15));
}

TEST_CASE("field energy counts interior nodes only") {
  DiskSetup su(33, 4);
  FieldState f(su.g);
  // Unit-magnitude field everywhere; only interior nodes may contribute.
  for (auto& v : f.E) v = {1.0, 0.0, 0.0};
  const double vol = su.g.xy.dx * su.g.xy.dy * su.g.dz;
  const double want = su.interior_count() * su.g.nz * vol / 2.0;
  CHECK(field_energy(f, su.cl) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("field energy approaches the continuum integral") {
  // Rim-vanishing integrand: second-order decay toward pi/24.
  const double exact = M_PI / 24.0;
  const double e33 = std::abs(rim_vanishing_ep(33) - exact);
  const double e65 = std::abs(rim_vanishing_ep(65) - exact);
  CHECK(e65 <= 2e-5 * exact);
  CHECK(e33 / e65 >= 4.0);

  // Integrand 2 r^2 does not vanish at the rim; the boundary strip then
  // dominates and only a first-order envelope holds.
  auto generic_ep = [](int n) {
    DiskSetup su(n, 1);
    FieldState f(su.g);
    for (int j = 0; j < su.g.xy.ny; ++j)
      for (int i = 0; i < su.g.xy.nx; ++i) {
        const Vec2 p = su.g.xy.node(i, j);
        f.E[su.g.index(i, j, 0)] = {-2.0 * p.x, -2.0 * p.y, 0.0};
      }
    return field_energy(f, su.cl);
  };
  CHECK(std::abs(generic_ep(33) - M_PI) <= 0.05 * M_PI);
  CHECK(std::abs(generic_ep(129) - M_PI) <= 5e-3 * M_PI);
}

TEST_CASE("adiabatic variable weights eperp by the local intensity") {
  UniformBField b1(1.0);
  std::vector<ParticleState> ps(1);
  ps[0].x = {0.3, -0.2, 0.5};
  ps[0].eperp = 1.0;
  ps[0].w = 1.0;
  CHECK(adiabatic(ps, b1) == doctest::Approx(1.0).epsilon(1e-15));
  UniformBField b2(2.0);
  CHECK(adiabatic(ps, b2) == doctest::Approx(0.5).epsilon(1e-15));

  // Matches the raw perpendicular energy whenever eperp is consistent.
  Rng rng(31337);
  std::vector<ParticleState> ens(200);
  for (auto& p : ens) {
    p.x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
    p.v = {rng.gauss(), rng.gauss(), rng.gauss()};
    p.eperp = 0.5 * (p.v.x * p.v.x + p.v.y * p.v.y);
    p.w = rng.uniform(0.5, 1.5);
  }
  double direct = 0.0;
  for (const auto& p : ens)
    direct += p.w * 0.5 * (p.v.x * p.v.x + p.v.y * p.v.y) / 2.0;
  CHECK(adiabatic(ens, b2) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("reductions are permutation invariant to rounding") {
  Rng rng(99);
  std::vector<ParticleState> ens(5000);
  for (auto& p : ens) {
    p.x = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
           rng.uniform(0.0, 1.0)};
    p.v = {rng.gauss(), rng.gauss(), rng.gauss()};
    p.eperp = rng.uniform(0.0, 3.0);
    p.w = rng.uniform(0.5, 1.5);
  }
  std::vector<ParticleState> rev(ens.rbegin(), ens.rend());
  const EnergyBreakdown a = kinetic_energy(ens);
  const EnergyBreakdown b = kinetic_energy(rev);
  CHECK(std::abs(a.ek_aug - b.ek_aug) <= 1e-12 * a.ek_aug);
  CHECK(std::abs(a.ek_raw - b.ek_raw) <= 1e-12 * a.ek_raw);
  UniformBField bf(1.5);
  CHECK(std::abs(adiabatic(ens, bf) - adiabatic(rev, bf)) <=
        1e-12 * std::abs(adiabatic(ens, bf)));
}

TEST_CASE("relative variation") {
  CHECK(relative_variation({3.0, 3.0, 3.0}) ==
        std::vector<double>{0.0, 0.0, 0.0});
  const auto v = relative_variation({2.0, 3.0});
  CHECK(v[0] == 0.0);
  CHECK(v[1] == doctest::Approx(0.5).epsilon(1e-15));

  // Linear drift q = q0 (1 + a t) maps to exactly a*t.
  const double q0 = 2.5, a = 0.125;
  std::vector<double> q;
  for (int i = 0; i <= 10; ++i) q.push_back(q0 * (1.0 + a * 0.3 * i));
  const auto rv = relative_variation(q);
  for (int i = 0; i <= 10; ++i)
    CHECK(rv[i] == doctest::Approx(a * 0.3 * i).epsilon(1e-13));

  CHECK_THROWS_AS(relative_variation({0.0, 1.0}), ZeroBaseline);
  CHECK(relative_variation({}).empty());
}

TEST_CASE("diagnostics CSV header and row format") {
  const std::string path = "diag_test.csv";
  {
    DiagnosticsWriter w(path);
    DiagnosticsRecord r;
    r.t = 0.5;
    r.ek_aug = 1.0 / 3.0;
    r.ek_raw = 0.25;
    r.ep = 2.0;
    r.et = r.ek_aug + r.ep;
    r.mu = 0.125;
    r.charge_lost = 0.0;
    w.append(r);
  }
  std::ifstream in(path);
  std::string header, row;
  REQUIRE(std::getline(in, header));
  REQUIRE(std::getline(in, row));
  CHECK(header == "t,Ek_aug,Ek_raw,Ep,Et,mu,charge_lost");
  double t, a, b, c, d, e, f;
  REQUIRE(std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &t, &a, &b,
                      &c, &d, &e, &f) == 7);
  CHECK(t == 0.5);
  // Full round trip through %.17g.
  CHECK(a == 1.0 / 3.0);
  CHECK(f == 0.0);
  std::remove(path.c_str());
}
