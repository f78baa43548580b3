// Particle-grid transfer: B-spline shapes, charge deposition onto the
// embedded cross-section grid, field interpolation at particle positions,
// and velocity reconstruction from the augmented particle state.
#pragma once

#include <vector>

#include "gyropic/geometry.hpp"
#include "gyropic/grid.hpp"
#include "gyropic/vec.hpp"

namespace gyropic {

// Centered B-spline of the given order; compact support is
// [-(order+1)/2, (order+1)/2] in units of the grid spacing.
double shape(int order, double s);

struct ShapeSpec {
  int order = 1;  // 1 linear, 2 quadratic, 3 cubic
  double radius() const { return 0.5 * (order + 1); }
};

struct ParticleState {
  Vec3 x;
  Vec3 v;
  double eperp = 0.0;  // auxiliary perpendicular energy, >= 0
  double w = 0.0;      // statistical weight, charge units
};

struct DepositStats {
  // Charge whose shape weight landed on ghost or exterior nodes and was
  // dropped by the zero extension.
  double lost = 0.0;
};

// rho(node) = sum_k w_k prod_axes shape(.) / cell volume; z wraps, (x,y)
// weights outside the interior are dropped and accumulated into `lost`.
// rho must be sized grid.size(); it is overwritten. With nthreads > 1 the
// particle range is split into contiguous chunks accumulated on private
// grids and merged in chunk order; results across thread counts agree to
// rounding only.
DepositStats deposit(const std::vector<ParticleState>& particles,
                     const Grid3& g, const GridClassification& cl,
                     const ShapeSpec& spec, std::vector<double>& rho,
                     int nthreads = 1);

// Tensor-product interpolation of a nodal scalar with the same shape as
// deposit; non-interior nodes read as zero, which makes the pair exactly
// adjoint. z is periodic.
double interpolate_grid(const std::vector<double>& values, const Grid3& g,
                        const GridClassification& cl, const ShapeSpec& spec,
                        const Vec3& x);

// Same stencil applied to the three components of a nodal vector field.
Vec3 interpolate_E(const std::vector<Vec3>& E, const Grid3& g,
                   const GridClassification& cl, const ShapeSpec& spec,
                   const Vec3& x);

// Velocity carried by the augmented state: perpendicular direction from
// v_perp rescaled to energy eperp, plus the parallel component. If the
// perpendicular direction is degenerate (|v_perp| < 1e-14) but eperp > 0,
// the direction defaults to e_x and *degenerate_dir is set.
Vec3 reconstruct_velocity(const Vec2& vperp, double eperp, double vpar,
                          bool* degenerate_dir = nullptr);

}  // namespace gyropic
