// Electrostatic field solve on the embedded cross-section: -lap(phi) = rho
// with phi = 0 on the section boundary and periodicity along z. A discrete
// Fourier transform in z reduces the problem to one 2D five-point Helmholtz
// system per mode; ghost nodes are eliminated through boundary-anchored
// normal extrapolation so only interior nodes remain unknowns.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gyropic/geometry.hpp"
#include "gyropic/grid.hpp"
#include "gyropic/vec.hpp"

namespace gyropic {

// Quadratic extrapolation along the inward normal. Samples sit at arc
// positions {0, h, 2h} (boundary point, two interior probes); the ghost
// value is the quadratic evaluated at sg < 0.
struct GhostWeights {
  double wp = 0.0;   // boundary point (carries the Dirichlet value)
  double wh = 0.0;   // probe at distance h inside
  double w2h = 0.0;  // probe at distance 2h inside
};
GhostWeights ghost_weights(double sg, double h);

// Interpolation of a grid function at an off-node target from interior
// nodes only. degree 2: nine-node tensor Lagrange (three grid lines
// transverse to the dominant direction, three nearest interior nodes per
// line). degree 1: the four corners of the containing cell. degree 0: the
// nearest interior node. Weights always sum to 1.
struct InterpStencil {
  std::vector<std::int32_t> nodes;  // 2D node ids, j*nx + i, interior only
  std::vector<double> weights;
  int degree = 0;
};

struct NoInteriorNode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// `axis_hint` orients the degree-2 line selection (the inward normal of the
// ghost whose probe is being interpolated); only the dominant component is
// used.
InterpStencil interp_stencil(const Vec2& target, const Vec2& axis_hint,
                             const Grid2& g, const GridClassification& cl);

// Full closure for one ghost node: extrapolation weights plus the stencils
// reconstructing the two probe values from interior nodes.
struct GhostClosure {
  GhostWeights w;
  InterpStencil probe_h;
  InterpStencil probe_2h;
};

// One z-mode of the transformed operator, rows over interior unknowns in
// row-major interior order. boundary_coupling[r] is the coefficient the
// eliminated ghosts attach to the boundary value in row r; with a
// homogeneous Dirichlet condition it only feeds the row-sum identity
// sum(row) + boundary_coupling = mode_shift.
struct ModeOperator {
  std::vector<std::int32_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<double> val;
  std::vector<double> boundary_coupling;
  double mode_shift = 0.0;
  std::int32_t n = 0;
};

struct SolverDiverged : std::runtime_error {
  SolverDiverged(int mode_, double residual_, const std::string& what_)
      : std::runtime_error(what_), mode(mode_), residual(residual_) {}
  int mode = 0;
  double residual = 0.0;
};

// Nodal fields on the full 3D grid. phi is zero at exterior and ghost
// nodes after a solve; E is zero outside the interior.
struct FieldState {
  Grid3 grid;
  std::vector<double> rho;
  std::vector<double> phi;
  std::vector<Vec3> E;

  explicit FieldState(const Grid3& g)
      : grid(g), rho(g.size(), 0.0), phi(g.size(), 0.0), E(g.size(), Vec3{}) {}
};

class PoissonSolver {
 public:
  PoissonSolver(const Grid3& grid, const DomainSpec& domain);

  const GridClassification& classification() const { return cl_; }
  const std::vector<GhostClosure>& closures() const { return closures_; }
  const Grid3& grid() const { return grid_; }
  std::int32_t interior_count() const { return n_unknowns_; }

  // Materializes the Helmholtz operator of mode k (diagnostic surface;
  // solves reuse the cached base matrix).
  ModeOperator assemble_mode(int k) const;

  // rho -> phi, E. Relative residual 1e-10 per mode, iteration cap 10 N.
  // Throws SolverDiverged naming the mode on failure.
  void solve(FieldState& f) const;

  // Ghost value of a 2D slab of phi under the closure of ghost `gi`.
  double ghost_value(std::int32_t gi, const double* phi_slab) const;

  // Residual of the last solve, max over modes of |b - A x| / |b|.
  double last_residual() const { return last_residual_; }

 private:
  Grid3 grid_;
  DomainSpec domain_;
  GridClassification cl_;
  std::vector<GhostClosure> closures_;

  std::vector<std::int32_t> unknown_of_;  // 2D node id -> row, or -1
  std::vector<std::int32_t> node_of_;     // row -> 2D node id
  std::int32_t n_unknowns_ = 0;

  // Base CSR (mode shift excluded); diag_pos_[r] indexes the diagonal.
  std::vector<std::int32_t> row_ptr_, col_;
  std::vector<double> val_;
  std::vector<std::int32_t> diag_pos_;
  std::vector<double> boundary_coupling_;

  // Combined interior-node stencil per ghost (closure collapsed once).
  std::vector<std::vector<std::pair<std::int32_t, double>>> ghost_combined_;

  mutable std::vector<std::vector<double>> warm_;  // per (mode, re/im) start
  mutable double last_residual_ = 0.0;

  void assemble_base();
  // Solves (base + shift I) x = b; x carries the warm start on entry.
  void solve_mode(int k, double shift, const std::vector<double>& b,
                  std::vector<double>& x) const;
};

// Plain-text grid dump: header `# nx ny nz dx dy dz`, then row-major
// values, one z-slab per blank-line-separated block.
void write_grid_snapshot(const std::string& path, const Grid3& g,
                         const std::vector<double>& values);

}  // namespace gyropic
