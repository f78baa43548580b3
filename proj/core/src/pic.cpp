// Particle-grid transfer kernels shared by deposit and interpolation.
#include "gyropic/pic.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace gyropic {

double shape(int order, double s) {
  const double a = std::abs(s);
  switch (order) {
    case 1:
      return a < 1.0 ? 1.0 - a : 0.0;
    case 2:
      if (a < 0.5) return 0.75 - a * a;
      if (a < 1.5) {
        const double t = 1.5 - a;
        return 0.5 * t * t;
      }
      return 0.0;
    case 3:
      if (a < 1.0) return (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0;
      if (a < 2.0) {
        const double t = 2.0 - a;
        return t * t * t / 6.0;
      }
      return 0.0;
    default:
      throw std::invalid_argument("shape: order must be 1, 2, or 3");
  }
}

namespace {

// Nodes touched along one axis and their weights. Order 3 spans at most
// five integers, with the end ones possibly zero.
struct AxisTaps {
  int first = 0;
  int count = 0;
  double w[6] = {};
};

AxisTaps axis_taps(int order, double u) {
  const double r = 0.5 * (order + 1);
  AxisTaps t;
  t.first = static_cast<int>(std::ceil(u - r));
  const int last = static_cast<int>(std::floor(u + r));
  t.count = last - t.first + 1;
  if (t.count > 6) t.count = 6;
  for (int m = 0; m < t.count; ++m) t.w[m] = shape(order, u - (t.first + m));
  return t;
}

inline int wrap(int m, int n) {
  m %= n;
  return m < 0 ? m + n : m;
}

void deposit_range(const std::vector<ParticleState>& particles, size_t begin,
                   size_t end, const Grid3& g, const GridClassification& cl,
                   const ShapeSpec& spec, std::vector<double>& rho,
                   double& lost) {
  const Grid2& xy = g.xy;
  const double inv_vol = 1.0 / (xy.dx * xy.dy * g.dz);
  for (size_t k = begin; k < end; ++k) {
    const ParticleState& p = particles[k];
    const double ux = (p.x.x - xy.x0) / xy.dx;
    const double uy = (p.x.y - xy.y0) / xy.dy;
    const double uz = (p.x.z - g.z0) / g.dz;
    const AxisTaps tx = axis_taps(spec.order, ux);
    const AxisTaps ty = axis_taps(spec.order, uy);
    const AxisTaps tz = axis_taps(spec.order, uz);
    double kept = 0.0;
    for (int a = 0; a < tx.count; ++a) {
      const int i = tx.first + a;
      if (i < 0 || i >= xy.nx || tx.w[a] == 0.0) continue;
      for (int b = 0; b < ty.count; ++b) {
        const int j = ty.first + b;
        if (j < 0 || j >= xy.ny || ty.w[b] == 0.0) continue;
        if (cl.at(i, j) != NodeLabel::Interior) continue;
        const double wxy = tx.w[a] * ty.w[b];
        for (int c = 0; c < tz.count; ++c) {
          if (tz.w[c] == 0.0) continue;
          const int m = wrap(tz.first + c, g.nz);
          const double s = wxy * tz.w[c];
          rho[g.index(i, j, m)] += p.w * s * inv_vol;
          kept += s;
        }
      }
    }
    lost += p.w * (1.0 - kept);
  }
}

}  // namespace

DepositStats deposit(const std::vector<ParticleState>& particles,
                     const Grid3& g, const GridClassification& cl,
                     const ShapeSpec& spec, std::vector<double>& rho,
                     int nthreads) {
  if (rho.size() != g.size())
    throw std::invalid_argument("deposit: rho has wrong size");
  std::fill(rho.begin(), rho.end(), 0.0);
  DepositStats stats;
  const size_t n = particles.size();
  if (nthreads <= 1 || n < 2) {
    deposit_range(particles, 0, n, g, cl, spec, rho, stats.lost);
    return stats;
  }
  const size_t nt = std::min<size_t>(nthreads, n);
  std::vector<std::vector<double>> buf(nt, std::vector<double>(g.size(), 0.0));
  std::vector<double> lost(nt, 0.0);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (size_t t = 0; t < nt; ++t) {
    const size_t begin = n * t / nt;
    const size_t end = n * (t + 1) / nt;
    pool.emplace_back([&, t, begin, end] {
      deposit_range(particles, begin, end, g, cl, spec, buf[t], lost[t]);
    });
  }
  for (auto& th : pool) th.join();
  // Merge in chunk order so the result is a function of nthreads alone.
  for (size_t t = 0; t < nt; ++t) {
    const std::vector<double>& b = buf[t];
    for (size_t q = 0; q < rho.size(); ++q) rho[q] += b[q];
    stats.lost += lost[t];
  }
  return stats;
}

namespace {

template <class T, class Fetch>
T interpolate_impl(const Grid3& g, const GridClassification& cl,
                   const ShapeSpec& spec, const Vec3& x, Fetch fetch, T zero) {
  const Grid2& xy = g.xy;
  const AxisTaps tx = axis_taps(spec.order, (x.x - xy.x0) / xy.dx);
  const AxisTaps ty = axis_taps(spec.order, (x.y - xy.y0) / xy.dy);
  const AxisTaps tz = axis_taps(spec.order, (x.z - g.z0) / g.dz);
  T acc = zero;
  for (int a = 0; a < tx.count; ++a) {
    const int i = tx.first + a;
    if (i < 0 || i >= xy.nx || tx.w[a] == 0.0) continue;
    for (int b = 0; b < ty.count; ++b) {
      const int j = ty.first + b;
      if (j < 0 || j >= xy.ny || ty.w[b] == 0.0) continue;
      if (cl.at(i, j) != NodeLabel::Interior) continue;
      const double wxy = tx.w[a] * ty.w[b];
      for (int c = 0; c < tz.count; ++c) {
        if (tz.w[c] == 0.0) continue;
        const int m = wrap(tz.first + c, g.nz);
        acc = acc + fetch(g.index(i, j, m)) * (wxy * tz.w[c]);
      }
    }
  }
  return acc;
}

}  // namespace

double interpolate_grid(const std::vector<double>& values, const Grid3& g,
                        const GridClassification& cl, const ShapeSpec& spec,
                        const Vec3& x) {
  return interpolate_impl<double>(
      g, cl, spec, x, [&](size_t q) { return values[q]; }, 0.0);
}

Vec3 interpolate_E(const std::vector<Vec3>& E, const Grid3& g,
                   const GridClassification& cl, const ShapeSpec& spec,
                   const Vec3& x) {
  return interpolate_impl<Vec3>(
      g, cl, spec, x, [&](size_t q) { return E[q]; }, Vec3{0.0, 0.0, 0.0});
}

Vec3 reconstruct_velocity(const Vec2& vperp, double eperp, double vpar,
                          bool* degenerate_dir) {
  if (degenerate_dir) *degenerate_dir = false;
  const double n = norm(vperp);
  const double speed = std::sqrt(2.0 * std::max(eperp, 0.0));
  if (n < 1e-14) {
    if (speed == 0.0) return {0.0, 0.0, vpar};
    if (degenerate_dir) *degenerate_dir = true;
    return {speed, 0.0, vpar};
  }
  return {speed * vperp.x / n, speed * vperp.y / n, vpar};
}

}  // namespace gyropic
