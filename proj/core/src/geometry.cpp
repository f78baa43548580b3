#include "gyropic/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gyropic {

namespace {

constexpr double kTwoPi = 6.28318530717958647692528676656;

// Unit-scale ray direction of the constant-xi2 curve through the center.
Vec2 ray_direction(const DomainSpec& d, double xi2) {
  return {std::cos(xi2 + d.triangularity * std::sin(xi2)),
          d.elongation * std::sin(xi2)};
}

// Polar angle of the xi2 ray, unwrapped to [0, 2pi] monotonically.
double ray_angle(const DomainSpec& d, double xi2) {
  if (xi2 <= 0.0) return 0.0;
  if (xi2 >= kTwoPi) return kTwoPi;
  const Vec2 u = ray_direction(d, xi2);
  double a = std::atan2(u.y, u.x);
  if (xi2 > 3.141592653589793 && a <= 0.0) a += kTwoPi;
  if (a < 0.0) a += kTwoPi;  // xi2 slightly below pi cannot produce y<0
  return a;
}

// Inverts the star-shaped mapping: xi2 whose ray points along `theta`.
double xi2_of_angle(const DomainSpec& d, double theta) {
  double lo = 0.0, hi = kTwoPi;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ray_angle(d, mid) < theta)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Vec2 dshape_boundary(const DomainSpec& d, double xi2) {
  return map_dshape(d, d.scale, xi2);
}

Vec2 dshape_boundary_tangent(const DomainSpec& d, double xi2) {
  const double psi = xi2 + d.triangularity * std::sin(xi2);
  const double dpsi = 1.0 + d.triangularity * std::cos(xi2);
  return {-d.scale * std::sin(psi) * dpsi,
          d.scale * d.elongation * std::cos(xi2)};
}

Vec2 dshape_boundary_second(const DomainSpec& d, double xi2) {
  const double psi = xi2 + d.triangularity * std::sin(xi2);
  const double dpsi = 1.0 + d.triangularity * std::cos(xi2);
  const double ddpsi = -d.triangularity * std::sin(xi2);
  return {-d.scale * (std::cos(psi) * dpsi * dpsi + std::sin(psi) * ddpsi),
          -d.scale * d.elongation * std::sin(xi2)};
}

BoundaryTrace make_trace(const Vec2& xg, const Vec2& xp, const Vec2& outward) {
  BoundaryTrace t;
  t.xp = xp;
  t.normal = -outward;
  t.sg = -norm(xg - xp);
  return t;
}

}  // namespace

DomainSpec DomainSpec::disk(const Vec2& c, double r, double lz) {
  DomainSpec d;
  d.kind = DomainKind::Disk;
  d.center = c;
  d.radius = r;
  d.lz = lz;
  return d;
}

DomainSpec DomainSpec::dshape(const Vec2& c, double r0, double lz) {
  DomainSpec d;
  d.kind = DomainKind::DShape;
  d.center = c;
  d.scale = r0;
  d.triangularity = std::asin(0.416);
  d.elongation = 1.66;
  d.lz = lz;
  return d;
}

Vec2 map_dshape(const DomainSpec& d, double xi1, double xi2) {
  return d.center + xi1 * ray_direction(d, xi2);
}

double boundary_radius_towards(const DomainSpec& d, const Vec2& p) {
  if (d.kind == DomainKind::Disk) return d.radius;
  const Vec2 rel = p - d.center;
  if (norm2(rel) == 0.0) return d.scale * 1.0;  // any ray; center is interior
  double theta = std::atan2(rel.y, rel.x);
  if (theta < 0.0) theta += kTwoPi;
  const double xi2 = xi2_of_angle(d, theta);
  return d.scale * norm(ray_direction(d, xi2));
}

bool contains(const DomainSpec& d, const Vec2& p) {
  const double r = norm(p - d.center);
  return r < boundary_radius_towards(d, p);
}

BoundaryTrace boundary_trace(const DomainSpec& d, const Vec2& xg) {
  const Vec2 rel = xg - d.center;
  const double r = norm(rel);
  if (r == 0.0)
    throw NoIntersection("boundary_trace: query point is the domain center");

  if (d.kind == DomainKind::Disk) {
    const Vec2 outward = rel / r;
    return make_trace(xg, d.center + d.radius * outward, outward);
  }

  // Newton on the nearest-point condition g(xi2) = <c'(xi2), c(xi2)-xg> = 0,
  // seeded with the radial-ray angle.
  double theta = std::atan2(rel.y, rel.x);
  if (theta < 0.0) theta += kTwoPi;
  const double xi2_seed = xi2_of_angle(d, theta);
  const double tol = 1e-12 * d.scale;

  const auto misfit_slope = [&](double s) {
    return dot(dshape_boundary_tangent(d, s), dshape_boundary(d, s) - xg);
  };

  double xi2 = xi2_seed;
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    const Vec2 c = dshape_boundary(d, xi2);
    const Vec2 t1 = dshape_boundary_tangent(d, xi2);
    const Vec2 t2 = dshape_boundary_second(d, xi2);
    const Vec2 misfit = c - xg;
    const double g = dot(t1, misfit);
    const double dg = dot(t2, misfit) + dot(t1, t1);
    if (dg == 0.0) break;
    const double step = g / dg;
    xi2 -= step;
    if (std::abs(xi2 - xi2_seed) > 0.75) break;  // strayed; use the fallback
    if (std::abs(step) * norm(t1) < tol) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    // Bisect g around the radial seed. The bracket widens until the slope
    // changes sign; the nearest point of a near-boundary query sits well
    // inside +-0.6 of the seed angle.
    double lo = xi2_seed, hi = xi2_seed;
    double glo = misfit_slope(lo), ghi = glo;
    for (int k = 1; k <= 12 && glo * ghi > 0.0; ++k) {
      lo = xi2_seed - 0.05 * k;
      hi = xi2_seed + 0.05 * k;
      glo = misfit_slope(lo);
      ghi = misfit_slope(hi);
    }
    if (glo * ghi <= 0.0) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (misfit_slope(mid) * glo <= 0.0)
          hi = mid;
        else {
          lo = mid;
          glo = misfit_slope(lo);
        }
      }
      xi2 = 0.5 * (lo + hi);
    } else {
      xi2 = xi2_seed;  // radial-ray point; always a valid boundary point
    }
  }

  const Vec2 xp = dshape_boundary(d, xi2);
  const Vec2 t1 = dshape_boundary_tangent(d, xi2);
  const double tn = norm(t1);
  if (!(tn > 0.0))
    throw NoIntersection("boundary_trace: degenerate boundary tangent");
  Vec2 outward{t1.y / tn, -t1.x / tn};
  if (dot(outward, xg - xp) < 0.0) outward = -outward;
  return make_trace(xg, xp, outward);
}

GridClassification classify(const Grid2& g, const DomainSpec& d) {
  GridClassification out;
  out.nx = g.nx;
  out.ny = g.ny;
  out.label.assign(g.size(), NodeLabel::Exterior);
  out.regular.assign(g.size(), 0);
  out.ghost_of.assign(g.size(), -1);

  std::vector<std::uint8_t> inside(g.size(), 0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      inside[g.index(i, j)] = contains(d, g.node(i, j)) ? 1 : 0;

  const auto is_inside = [&](int i, int j) {
    if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return false;
    return inside[g.index(i, j)] != 0;
  };

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const std::size_t id = g.index(i, j);
      if (inside[id]) {
        out.label[id] = NodeLabel::Interior;
        out.regular[id] = is_inside(i - 1, j) && is_inside(i + 1, j) &&
                                  is_inside(i, j - 1) && is_inside(i, j + 1)
                              ? 1
                              : 0;
        continue;
      }
      const bool touches_interior = is_inside(i - 1, j) || is_inside(i + 1, j) ||
                                    is_inside(i, j - 1) || is_inside(i, j + 1);
      if (touches_interior) {
        out.label[id] = NodeLabel::Ghost;
        out.ghost_of[id] = static_cast<std::int32_t>(out.ghosts.size());
        out.ghosts.push_back({i, j, boundary_trace(d, g.node(i, j))});
      }
    }
  }
  return out;
}

Box2 bounding_box(const DomainSpec& d) {
  if (d.kind == DomainKind::Disk) {
    return {d.center - Vec2{d.radius, d.radius}, d.center + Vec2{d.radius, d.radius}};
  }
  Box2 b{{1e300, 1e300}, {-1e300, -1e300}};
  const int n = 4096;
  for (int k = 0; k <= n; ++k) {
    const Vec2 p = dshape_boundary(d, kTwoPi * k / n);
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

}  // namespace gyropic
