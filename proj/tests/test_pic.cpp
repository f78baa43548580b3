// Particle-grid transfer: shape functions, deposition accounting,
// interpolation, adjointness, and velocity reconstruction.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gyropic/geometry.hpp"
#include "gyropic/grid.hpp"
#include "gyropic/pic.hpp"
#include "gyropic/rng.hpp"

using namespace gyropic;

namespace {

struct Setup {
  DomainSpec dom = DomainSpec::disk({0.0, 0.0}, 6.0, 1.0);
  Grid3 g;
  GridClassification cl;

  Setup() {
    g.xy = {-7.0, -7.0, 0.5, 0.5, 29, 29};
    g.z0 = 0.0;
    g.dz = 1.0 / 8.0;
    g.nz = 8;
    cl = classify(g.xy, dom);
  }
};

double total_charge(const std::vector<double>& rho, const Grid3& g) {
  double s = 0.0;
  for (double v : rho) s += v;
  return s * g.xy.dx * g.xy.dy * g.dz;
}

// Positions with the full stencil footprint inside the disk for any
// order up to 3 (support radius 2 cells of 0.5 plus slack).
Vec3 deep_position(Rng& rng) {
  for (;;) {
    Vec3 p{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0),
           rng.uniform(0.0, 1.0)};
    if (p.x * p.x + p.y * p.y <= 16.0) return p;
  }
}

}  // namespace

TEST_CASE("b-spline shape values and partition of unity") {
  CHECK(shape(1, 0.0) == 1.0);
  CHECK(shape(1, 1.0) == 0.0);
  CHECK(shape(1, -1.0) == 0.0);
  CHECK(shape(1, 0.25) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(shape(2, 0.0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(shape(3, 0.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  // Support edge is closed to zero.
  CHECK(shape(2, 1.5) == 0.0);
  CHECK(shape(3, 2.0) == 0.0);

  Rng rng(2024);
  for (int order = 1; order <= 3; ++order) {
    for (int trial = 0; trial < 100; ++trial) {
      const double u = rng.uniform(-10.0, 10.0);
      double sum = 0.0;
      double first_moment = 0.0;
      for (int j = -14; j <= 14; ++j) {
        const double w = shape(order, u - j);
        CHECK(w >= 0.0);
        sum += w;
        first_moment += j * w;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      // Linear reproduction along one axis.
      CHECK(first_moment == doctest::Approx(u).epsilon(1e-12));
      // Symmetry.
      const double s = rng.uniform(0.0, 2.5);
      CHECK(shape(order, s) == shape(order, -s));
    }
  }
}

TEST_CASE("deposit puts full weight on the node under a particle") {
  Setup su;
  std::vector<double> rho(su.g.size(), 0.0);
  ParticleState p;
  p.x = {su.g.xy.node(14, 16).x, su.g.xy.node(14, 16).y, su.g.z(3)};
  p.w = 2.5;
  const DepositStats st = deposit({p}, su.g, su.cl, {1}, rho);
  const double vol = su.g.xy.dx * su.g.xy.dy * su.g.dz;
  CHECK(rho[su.g.index(14, 16, 3)] == doctest::Approx(2.5 / vol).epsilon(1e-14));
  CHECK(total_charge(rho, su.g) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(st.lost == doctest::Approx(0.0));
}

TEST_CASE("deposit splits a cell-centered particle 0.25 per plane node") {
  Setup su;
  std::vector<double> rho(su.g.size(), 0.0);
  const Vec2 a = su.g.xy.node(14, 14);
  ParticleState p;
  p.x = {a.x + 0.5 * su.g.xy.dx, a.y + 0.5 * su.g.xy.dy, su.g.z(5)};
  p.w = 1.0;
  deposit({p}, su.g, su.cl, {1}, rho);
  const double vol = su.g.xy.dx * su.g.xy.dy * su.g.dz;
  for (int di = 0; di <= 1; ++di)
    for (int dj = 0; dj <= 1; ++dj)
      CHECK(rho[su.g.index(14 + di, 14 + dj, 5)] * vol ==
            doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("deposited plus lost charge matches the particle total") {
  Setup su;
  Rng rng(77);
  for (int order = 1; order <= 3; ++order) {
    std::vector<ParticleState> deep(10000);
    double wsum = 0.0;
    for (auto& p : deep) {
      p.x = deep_position(rng);
      p.w = rng.uniform(0.5, 1.5);
      wsum += p.w;
    }
    std::vector<double> rho(su.g.size(), 0.0);
    DepositStats st = deposit(deep, su.g, su.cl, {order}, rho);
    CHECK(std::abs(total_charge(rho, su.g) - wsum) <= 1e-12 * wsum);
    CHECK(st.lost <= 1e-12 * wsum);

    // Particles hugging the boundary shed part of their footprint; the
    // loss diagnostic must close the balance exactly.
    std::vector<ParticleState> edge(500);
    wsum = 0.0;
    for (auto& p : edge) {
      const double th = rng.uniform(0.0, 6.2831853071795862);
      const double r = rng.uniform(5.7, 5.999);
      p.x = {r * std::cos(th), r * std::sin(th), rng.uniform(0.0, 1.0)};
      p.w = rng.uniform(0.5, 1.5);
      wsum += p.w;
    }
    st = deposit(edge, su.g, su.cl, {order}, rho);
    CHECK(st.lost > 0.0);
    CHECK(std::abs(total_charge(rho, su.g) + st.lost - wsum) <= 1e-12 * wsum);
  }
}

TEST_CASE("deposit and interpolation are adjoint for any nodal function") {
  Setup su;
  Rng rng(13);
  for (int order = 1; order <= 3; ++order) {
    std::vector<ParticleState> ps(800);
    for (auto& p : ps) {
      for (;;) {
        Vec2 q{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0)};
        if (contains(su.dom, q)) {
          p.x = {q.x, q.y, rng.uniform(0.0, 1.0)};
          break;
        }
      }
      p.w = rng.uniform(0.5, 2.0);
    }
    // Nonzero values on ghost and exterior nodes exercise the masking:
    // both transfer directions must ignore them identically.
    std::vector<double> gfun(su.g.size());
    for (auto& v : gfun) v = rng.uniform(-1.0, 1.0);

    std::vector<double> rho(su.g.size(), 0.0);
    deposit(ps, su.g, su.cl, {order}, rho);
    double lhs = 0.0;
    for (const auto& p : ps)
      lhs += p.w * interpolate_grid(gfun, su.g, su.cl, {order}, p.x);
    double rhs = 0.0;
    for (size_t q = 0; q < rho.size(); ++q) rhs += gfun[q] * rho[q];
    rhs *= su.g.xy.dx * su.g.xy.dy * su.g.dz;
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), 1.0));
  }
}

TEST_CASE("interpolation reproduces uniform and linear fields") {
  Setup su;
  Rng rng(4242);
  std::vector<Vec3> E(su.g.size(), Vec3{1.25, -0.5, 3.0});
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x = deep_position(rng);
    for (int order = 1; order <= 3; ++order) {
      const Vec3 v = interpolate_E(E, su.g, su.cl, {order}, x);
      CHECK(v.x == doctest::Approx(1.25).epsilon(1e-13));
      CHECK(v.y == doctest::Approx(-0.5).epsilon(1e-13));
      CHECK(v.z == doctest::Approx(3.0).epsilon(1e-13));
    }
  }

  // Fields linear in the cross-section coordinates (z must stay out of it:
  // the axis wraps). All spline orders reproduce them.
  std::vector<double> lin(su.g.size());
  for (int k = 0; k < su.g.nz; ++k)
    for (int j = 0; j < su.g.xy.ny; ++j)
      for (int i = 0; i < su.g.xy.nx; ++i) {
        const Vec2 n = su.g.xy.node(i, j);
        lin[su.g.index(i, j, k)] = 2.0 * n.x - 0.5 * n.y + 3.0;
      }
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 x = deep_position(rng);
    const double want = 2.0 * x.x - 0.5 * x.y + 3.0;
    for (int order = 1; order <= 3; ++order)
      CHECK(interpolate_grid(lin, su.g, su.cl, {order}, x) ==
            doctest::Approx(want).epsilon(1e-12));
  }

  // Linear shape evaluated exactly at a node reads the nodal value.
  const Vec3 at_node{su.g.xy.node(12, 15).x, su.g.xy.node(12, 15).y,
                     su.g.z(2)};
  CHECK(interpolate_grid(lin, su.g, su.cl, {1}, at_node) ==
        doctest::Approx(lin[su.g.index(12, 15, 2)]).epsilon(1e-14));
}

TEST_CASE("interpolation is periodic across the z seam") {
  Setup su;
  std::vector<double> fz(su.g.size());
  for (int k = 0; k < su.g.nz; ++k)
    for (size_t q = 0; q < su.g.xy.size(); ++q)
      fz[static_cast<size_t>(k) * su.g.xy.size() + q] =
          std::cos(2.0 * M_PI * su.g.z(k));
  const double just_below = su.g.lz() - 0.25 * su.g.dz;
  const double a = interpolate_grid(fz, su.g, su.cl, {3},
                                    {1.0, 0.5, just_below});
  const double b = interpolate_grid(fz, su.g, su.cl, {3},
                                    {1.0, 0.5, just_below - su.g.lz()});
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("deposition commutes with whole-cell z shifts") {
  Setup su;
  Rng rng(9001);
  std::vector<ParticleState> ps(2000);
  for (auto& p : ps) {
    p.x = deep_position(rng);
    p.w = rng.uniform(0.5, 1.5);
  }
  std::vector<double> rho(su.g.size(), 0.0), rho_shift(su.g.size(), 0.0);
  deposit(ps, su.g, su.cl, {2}, rho);
  for (auto& p : ps) p.x.z += 3.0 * su.g.dz;
  deposit(ps, su.g, su.cl, {2}, rho_shift);
  double worst = 0.0;
  for (int k = 0; k < su.g.nz; ++k)
    for (size_t q = 0; q < su.g.xy.size(); ++q) {
      const size_t from = static_cast<size_t>(k) * su.g.xy.size() + q;
      const size_t to =
          static_cast<size_t>((k + 3) % su.g.nz) * su.g.xy.size() + q;
      worst = std::max(worst, std::abs(rho_shift[to] - rho[from]));
    }
  double scale = 0.0;
  for (double v : rho) scale = std::max(scale, std::abs(v));
  CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("threaded deposition matches the serial sum") {
  Setup su;
  Rng rng(555);
  std::vector<ParticleState> ps(5000);
  for (auto& p : ps) {
    p.x = deep_position(rng);
    p.w = rng.uniform(0.5, 1.5);
  }
  std::vector<double> serial(su.g.size(), 0.0);
  const DepositStats st1 = deposit(ps, su.g, su.cl, {1}, serial, 1);
  double scale = 0.0;
  for (double v : serial) scale = std::max(scale, std::abs(v));
  for (int nt : {2, 3, 7}) {
    std::vector<double> par(su.g.size(), 0.0);
    const DepositStats stn = deposit(ps, su.g, su.cl, {1}, par, nt);
    double worst = 0.0;
    for (size_t q = 0; q < par.size(); ++q)
      worst = std::max(worst, std::abs(par[q] - serial[q]));
    CHECK(worst <= 1e-12 * scale);
    CHECK(stn.lost == doctest::Approx(st1.lost).epsilon(1e-12));
  }
}

TEST_CASE("velocity reconstruction from the augmented state") {
  bool flag = true;
  // Consistent state: eperp equals the perpendicular kinetic energy.
  Vec3 v = reconstruct_velocity({3.0, 4.0}, 12.5, 2.0, &flag);
  CHECK(v.x == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(v.y == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(v.z == 2.0);
  CHECK_FALSE(flag);

  // Energy overrides the magnitude, direction is kept.
  v = reconstruct_velocity({1.0, 0.0}, 2.0, 5.0, &flag);
  CHECK(v.x == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(v.y == 0.0);
  CHECK(v.z == 5.0);
  CHECK_FALSE(flag);

  // No perpendicular energy at all.
  v = reconstruct_velocity({0.0, 0.0}, 0.0, 7.0, &flag);
  CHECK(v.x == 0.0);
  CHECK(v.y == 0.0);
  CHECK(v.z == 7.0);
  CHECK_FALSE(flag);

  // Degenerate direction with energy left: falls back to e_x and flags.
  v = reconstruct_velocity({0.0, 0.0}, 0.5, 1.0, &flag);
  CHECK(v.x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v.y == 0.0);
  CHECK(v.z == 1.0);
  CHECK(flag);

  // Zero eperp wipes the perpendicular components even if v_perp is set.
  v = reconstruct_velocity({0.5, -0.5}, 0.0, -2.0);
  CHECK(v.x == 0.0);
  CHECK(v.y == 0.0);
  CHECK(v.z == -2.0);
}
