#include "gyropic/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace gyropic {

namespace {
constexpr double kTwoPi = 6.28318530717958647692528676656;
}

GhostWeights ghost_weights(double sg, double h) {
  GhostWeights w;
  w.wp = (sg - h) * (sg - 2.0 * h) / (2.0 * h * h);
  w.wh = -sg * (sg - 2.0 * h) / (h * h);
  w.w2h = sg * (sg - h) / (2.0 * h * h);
  return w;
}

namespace {

// 1D Lagrange basis over three distinct abscissae, evaluated at t.
void lagrange3(const double a[3], double t, double out[3]) {
  out[0] = (t - a[1]) * (t - a[2]) / ((a[0] - a[1]) * (a[0] - a[2]));
  out[1] = (t - a[0]) * (t - a[2]) / ((a[1] - a[0]) * (a[1] - a[2]));
  out[2] = (t - a[0]) * (t - a[1]) / ((a[2] - a[0]) * (a[2] - a[1]));
}

bool interior_at(const GridClassification& cl, int i, int j) {
  if (i < 0 || j < 0 || i >= cl.nx || j >= cl.ny) return false;
  return cl.at(i, j) == NodeLabel::Interior;
}

// Three interior nodes on one grid line, nearest to the transverse
// coordinate `t` within a bounded window. Returns false if the line does
// not hold three.
bool line_nodes(const GridClassification& cl, bool lines_are_const_x,
                int line, double t, double t0, double dt, int n_transverse,
                int out_idx[3]) {
  const int jc = static_cast<int>(std::lround((t - t0) / dt));
  std::vector<std::pair<double, int>> cands;
  for (int o = -4; o <= 4; ++o) {
    const int j = jc + o;
    if (j < 0 || j >= n_transverse) continue;
    const bool ok = lines_are_const_x ? interior_at(cl, line, j)
                                      : interior_at(cl, j, line);
    if (!ok) continue;
    const double d = std::abs(t0 + j * dt - t);
    if (d > 3.5 * dt) continue;
    cands.push_back({d, j});
  }
  if (cands.size() < 3) return false;
  std::sort(cands.begin(), cands.end());
  int picked[3] = {cands[0].second, cands[1].second, cands[2].second};
  std::sort(picked, picked + 3);
  out_idx[0] = picked[0];
  out_idx[1] = picked[1];
  out_idx[2] = picked[2];
  return true;
}

}  // namespace

InterpStencil interp_stencil(const Vec2& target, const Vec2& axis_hint,
                             const Grid2& g, const GridClassification& cl) {
  InterpStencil st;
  const bool dom_x = std::abs(axis_hint.x) >= std::abs(axis_hint.y);

  // Degree 2: three transverse grid lines, three interior nodes per line.
  {
    const double lc0 = dom_x ? g.x0 : g.y0;
    const double dl = dom_x ? g.dx : g.dy;
    const int nl = dom_x ? g.nx : g.ny;
    const double tc0 = dom_x ? g.y0 : g.x0;
    const double dt = dom_x ? g.dy : g.dx;
    const int nt = dom_x ? g.ny : g.nx;
    const double lpos = dom_x ? target.x : target.y;
    const double tpos = dom_x ? target.y : target.x;

    const int ic = static_cast<int>(std::lround((lpos - lc0) / dl));
    std::vector<std::pair<double, int>> lines;
    for (int o = -3; o <= 3; ++o) {
      const int i = ic + o;
      if (i < 0 || i >= nl) continue;
      const double d = std::abs(lc0 + i * dl - lpos);
      if (d > 2.5 * dl) continue;
      lines.push_back({d, i});
    }
    std::sort(lines.begin(), lines.end());

    int chosen[3];
    int nodes_of[3][3];
    int found = 0;
    for (const auto& [d, i] : lines) {
      if (line_nodes(cl, dom_x, i, tpos, tc0, dt, nt, nodes_of[found])) {
        chosen[found++] = i;
        if (found == 3) break;
      }
    }
    if (found == 3) {
      std::sort(chosen, chosen + 3);
      // Re-fetch per sorted line order so weights pair with the right line.
      for (int m = 0; m < 3; ++m)
        line_nodes(cl, dom_x, chosen[m], tpos, tc0, dt, nt, nodes_of[m]);
      double la[3] = {lc0 + chosen[0] * dl, lc0 + chosen[1] * dl,
                      lc0 + chosen[2] * dl};
      double lw[3];
      lagrange3(la, lpos, lw);
      for (int m = 0; m < 3; ++m) {
        double ta[3] = {tc0 + nodes_of[m][0] * dt, tc0 + nodes_of[m][1] * dt,
                        tc0 + nodes_of[m][2] * dt};
        double tw[3];
        lagrange3(ta, tpos, tw);
        for (int n = 0; n < 3; ++n) {
          const int i = dom_x ? chosen[m] : nodes_of[m][n];
          const int j = dom_x ? nodes_of[m][n] : chosen[m];
          st.nodes.push_back(static_cast<std::int32_t>(g.index(i, j)));
          st.weights.push_back(lw[m] * tw[n]);
        }
      }
      st.degree = 2;
      return st;
    }
  }

  // Degree 1: bilinear on the containing cell if all four corners are
  // interior.
  {
    const int i0 = static_cast<int>(std::floor((target.x - g.x0) / g.dx));
    const int j0 = static_cast<int>(std::floor((target.y - g.y0) / g.dy));
    if (interior_at(cl, i0, j0) && interior_at(cl, i0 + 1, j0) &&
        interior_at(cl, i0, j0 + 1) && interior_at(cl, i0 + 1, j0 + 1)) {
      const double fx = (target.x - (g.x0 + i0 * g.dx)) / g.dx;
      const double fy = (target.y - (g.y0 + j0 * g.dy)) / g.dy;
      st.nodes = {static_cast<std::int32_t>(g.index(i0, j0)),
                  static_cast<std::int32_t>(g.index(i0 + 1, j0)),
                  static_cast<std::int32_t>(g.index(i0, j0 + 1)),
                  static_cast<std::int32_t>(g.index(i0 + 1, j0 + 1))};
      st.weights = {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy),
                    (1.0 - fx) * fy, fx * fy};
      st.degree = 1;
      return st;
    }
  }

  // Degree 0: nearest interior node within three cells.
  {
    const int ic = static_cast<int>(std::lround((target.x - g.x0) / g.dx));
    const int jc = static_cast<int>(std::lround((target.y - g.y0) / g.dy));
    double best = 1e300;
    int bi = -1, bj = -1;
    for (int dj = -3; dj <= 3; ++dj) {
      for (int di = -3; di <= 3; ++di) {
        const int i = ic + di, j = jc + dj;
        if (!interior_at(cl, i, j)) continue;
        const Vec2 p = g.node(i, j);
        const double d2 = norm2(p - target);
        if (d2 < best) {
          best = d2;
          bi = i;
          bj = j;
        }
      }
    }
    if (bi < 0)
      throw NoInteriorNode("interp_stencil: no interior node within 3 cells");
    st.nodes = {static_cast<std::int32_t>(g.index(bi, bj))};
    st.weights = {1.0};
    st.degree = 0;
    return st;
  }
}

PoissonSolver::PoissonSolver(const Grid3& grid, const DomainSpec& domain)
    : grid_(grid), domain_(domain), cl_(classify(grid.xy, domain)) {
  assemble_base();
}

void PoissonSolver::assemble_base() {
  const Grid2& g = grid_.xy;
  const double h = std::min(g.dx, g.dy);

  unknown_of_.assign(g.size(), -1);
  node_of_.clear();
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (cl_.at(i, j) == NodeLabel::Interior) {
        unknown_of_[g.index(i, j)] = n_unknowns_++;
        node_of_.push_back(static_cast<std::int32_t>(g.index(i, j)));
      }
    }
  }

  closures_.reserve(cl_.ghosts.size());
  ghost_combined_.resize(cl_.ghosts.size());
  for (std::size_t gi = 0; gi < cl_.ghosts.size(); ++gi) {
    const BoundaryTrace& tr = cl_.ghosts[gi].trace;
    GhostClosure c;
    c.w = ghost_weights(tr.sg, h);
    c.probe_h = interp_stencil(tr.xp + h * tr.normal, tr.normal, g, cl_);
    c.probe_2h = interp_stencil(tr.xp + 2.0 * h * tr.normal, tr.normal, g, cl_);

    std::map<std::int32_t, double> acc;
    for (std::size_t m = 0; m < c.probe_h.nodes.size(); ++m)
      acc[c.probe_h.nodes[m]] += c.w.wh * c.probe_h.weights[m];
    for (std::size_t m = 0; m < c.probe_2h.nodes.size(); ++m)
      acc[c.probe_2h.nodes[m]] += c.w.w2h * c.probe_2h.weights[m];
    ghost_combined_[gi].assign(acc.begin(), acc.end());
    closures_.push_back(std::move(c));
  }

  const double cx = 1.0 / (g.dx * g.dx);
  const double cy = 1.0 / (g.dy * g.dy);

  row_ptr_.assign(n_unknowns_ + 1, 0);
  diag_pos_.assign(n_unknowns_, -1);
  boundary_coupling_.assign(n_unknowns_, 0.0);
  col_.clear();
  val_.clear();

  const int off_i[4] = {-1, 1, 0, 0};
  const int off_j[4] = {0, 0, -1, 1};
  const double off_c[4] = {-cx, -cx, -cy, -cy};

  for (std::int32_t r = 0; r < n_unknowns_; ++r) {
    const std::int32_t node = node_of_[r];
    const int i = node % g.nx;
    const int j = node / g.nx;

    std::map<std::int32_t, double> row;
    row[r] = 2.0 * cx + 2.0 * cy;

    for (int d = 0; d < 4; ++d) {
      const int ni = i + off_i[d];
      const int nj = j + off_j[d];
      if (ni < 0 || nj < 0 || ni >= g.nx || nj >= g.ny)
        throw std::runtime_error(
            "poisson: interior node at the grid edge; enlarge the grid");
      const std::size_t nid = g.index(ni, nj);
      const NodeLabel lab = cl_.at(ni, nj);
      if (lab == NodeLabel::Interior) {
        row[unknown_of_[nid]] += off_c[d];
      } else if (lab == NodeLabel::Ghost) {
        const std::int32_t gi = cl_.ghost_of[nid];
        for (const auto& [n2, w] : ghost_combined_[gi]) {
          const std::int32_t rc = unknown_of_[n2];
          if (rc < 0)
            throw std::runtime_error("poisson: closure hits a non-interior node");
          row[rc] += off_c[d] * w;
        }
        boundary_coupling_[r] += off_c[d] * closures_[gi].w.wp;
      } else {
        throw std::runtime_error(
            "poisson: interior node has an exterior non-ghost neighbor");
      }
    }

    for (const auto& [c2, v] : row) {
      if (c2 == r) diag_pos_[r] = static_cast<std::int32_t>(col_.size());
      col_.push_back(c2);
      val_.push_back(v);
    }
    row_ptr_[r + 1] = static_cast<std::int32_t>(col_.size());
  }
}

ModeOperator PoissonSolver::assemble_mode(int k) const {
  ModeOperator op;
  op.row_ptr = row_ptr_;
  op.col = col_;
  op.val = val_;
  op.boundary_coupling = boundary_coupling_;
  op.n = n_unknowns_;
  const double mu = std::pow(kTwoPi * k / grid_.lz(), 2);
  op.mode_shift = mu;
  for (std::int32_t r = 0; r < n_unknowns_; ++r) op.val[diag_pos_[r]] += mu;
  return op;
}

double PoissonSolver::ghost_value(std::int32_t gi, const double* phi_slab) const {
  double v = 0.0;
  for (const auto& [node, w] : ghost_combined_[gi]) v += w * phi_slab[node];
  return v;
}

namespace {

void csr_matvec(const std::vector<std::int32_t>& rp,
                const std::vector<std::int32_t>& col,
                const std::vector<double>& val, double shift,
                const std::vector<std::int32_t>& diag_pos,
                const std::vector<double>& x, std::vector<double>& y) {
  const std::int32_t n = static_cast<std::int32_t>(rp.size()) - 1;
  for (std::int32_t r = 0; r < n; ++r) {
    double acc = shift * x[r];
    for (std::int32_t p = rp[r]; p < rp[r + 1]; ++p) acc += val[p] * x[col[p]];
    y[r] = acc;
  }
  (void)diag_pos;
}

double dot_v(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_v(const std::vector<double>& a) { return std::sqrt(dot_v(a, a)); }

// One Jacobi-preconditioned BiCGStab run from the given iterate. Returns
// true when the true residual reaches tol * |b|. Exact breakdowns and
// non-finite scalars trigger a restart from the current iterate; x is
// only ever updated with finite increments, so the recovery residual is
// always well defined. A residual above 1e10 * |b| means the run is
// diverging and cannot be saved by restarting, so the attempt gives up
// and leaves the fallback to the caller.
bool bicgstab_attempt(const std::vector<std::int32_t>& row_ptr,
                      const std::vector<std::int32_t>& col,
                      const std::vector<double>& val, double shift,
                      const std::vector<std::int32_t>& diag_pos,
                      const std::vector<double>& b, std::vector<double>& x,
                      double tol, long maxit) {
  const std::int32_t n = static_cast<std::int32_t>(b.size());
  const double bnorm = norm_v(b);

  std::vector<double> diag(n);
  for (std::int32_t r = 0; r < n; ++r) diag[r] = val[diag_pos[r]] + shift;

  std::vector<double> r(n), rhat(n), v(n, 0.0), p(n, 0.0), ph(n), s(n), sh(n),
      t(n);

  const auto residual = [&](const std::vector<double>& xx,
                            std::vector<double>& rr) {
    csr_matvec(row_ptr, col, val, shift, diag_pos, xx, rr);
    for (std::int32_t i = 0; i < n; ++i) rr[i] = b[i] - rr[i];
  };

  residual(x, r);
  if (norm_v(r) <= tol * bnorm) return true;
  rhat = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;

  long it = 0;
  int restarts = 0;
  const auto restart = [&] {
    residual(x, r);
    rhat = r;
    rho = alpha = omega = 1.0;
    std::fill(v.begin(), v.end(), 0.0);
    std::fill(p.begin(), p.end(), 0.0);
  };
  while (it < maxit) {
    ++it;
    const double rho1 = dot_v(rhat, r);
    const bool breakdown = std::abs(rho1) < 1e-300 ||
                           (omega == 0.0 && it > 1) || !std::isfinite(rho1);
    if (breakdown) {
      if (++restarts > 8) return false;
      restart();
      continue;
    }
    const double beta = (rho1 / rho) * (alpha / omega);
    for (std::int32_t i = 0; i < n; ++i)
      p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::int32_t i = 0; i < n; ++i) ph[i] = p[i] / diag[i];
    csr_matvec(row_ptr, col, val, shift, diag_pos, ph, v);
    const double rv = dot_v(rhat, v);
    alpha = rho1 / rv;
    if (!std::isfinite(alpha)) {
      if (++restarts > 8) return false;
      restart();
      continue;
    }
    for (std::int32_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm_v(s) <= tol * bnorm) {
      for (std::int32_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
      residual(x, r);
      if (norm_v(r) <= tol * bnorm) return true;
      restart();
      continue;
    }
    for (std::int32_t i = 0; i < n; ++i) sh[i] = s[i] / diag[i];
    csr_matvec(row_ptr, col, val, shift, diag_pos, sh, t);
    const double tt = dot_v(t, t);
    omega = tt == 0.0 ? 0.0 : dot_v(t, s) / tt;
    if (!std::isfinite(omega)) {
      if (++restarts > 8) return false;
      restart();
      continue;
    }
    for (std::int32_t i = 0; i < n; ++i) x[i] += alpha * ph[i] + omega * sh[i];
    for (std::int32_t i = 0; i < n; ++i) r[i] = s[i] - omega * t[i];
    rho = rho1;
    const double rnorm = norm_v(r);
    if (!(rnorm <= 1e10 * bnorm)) return false;
    if (rnorm <= tol * bnorm) {
      residual(x, r);  // recurrence drift check against the true residual
      if (norm_v(r) <= tol * bnorm) return true;
      restart();
    }
  }

  residual(x, r);
  return norm_v(r) <= tol * bnorm;
}

}  // namespace

void PoissonSolver::solve_mode(int k, double shift, const std::vector<double>& b,
                               std::vector<double>& x) const {
  const std::int32_t n = n_unknowns_;
  x.resize(n, 0.0);

  const double bnorm = norm_v(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  const double tol = 1e-10;
  const long maxit = 10L * n;

  bool ok = bicgstab_attempt(row_ptr_, col_, val_, shift, diag_pos_, b, x,
                             tol, maxit);
  if (!ok) {
    // A stale starting iterate can send BiCGStab off course; the cold
    // start is the authoritative attempt.
    std::fill(x.begin(), x.end(), 0.0);
    ok = bicgstab_attempt(row_ptr_, col_, val_, shift, diag_pos_, b, x, tol,
                          maxit);
  }
  if (!ok) {
    std::vector<double> r(n);
    csr_matvec(row_ptr_, col_, val_, shift, diag_pos_, x, r);
    for (std::int32_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const double rel = norm_v(r) / bnorm;
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "poisson: mode %d stalled at relative residual %.3e", k, rel);
    throw SolverDiverged(k, rel, msg);
  }
}

void PoissonSolver::solve(FieldState& f) const {
  const Grid2& g = grid_.xy;
  const int nx = g.nx, ny = g.ny, nz = grid_.nz;
  const std::size_t slab = static_cast<std::size_t>(nx) * ny;
  const int nk = nz % 2 == 0 ? nz / 2 + 1 : (nz + 1) / 2;

  std::vector<double> ct(nz), stb(nz);
  for (int m = 0; m < nz; ++m) {
    ct[m] = std::cos(kTwoPi * m / nz);
    stb[m] = std::sin(kTwoPi * m / nz);
  }

  // Forward transform of rho on interior columns.
  std::vector<std::vector<double>> bre(nk), bim(nk);
  for (int k = 0; k < nk; ++k) {
    bre[k].assign(n_unknowns_, 0.0);
    bim[k].assign(n_unknowns_, 0.0);
  }
  for (std::int32_t r = 0; r < n_unknowns_; ++r) {
    const std::int32_t node = node_of_[r];
    for (int k = 0; k < nk; ++k) {
      double re = 0.0, im = 0.0;
      for (int m = 0; m < nz; ++m) {
        const int tw = static_cast<int>((static_cast<long>(k) * m) % nz);
        const double rho = f.rho[slab * m + node];
        re += rho * ct[tw];
        im -= rho * stb[tw];
      }
      bre[k][r] = re;
      bim[k][r] = im;
    }
  }

  if (warm_.size() != static_cast<std::size_t>(2 * nk))
    warm_.assign(2 * nk, std::vector<double>());

  double worst = 0.0;
  std::vector<std::vector<double>> xre(nk), xim(nk);
  for (int k = 0; k < nk; ++k) {
    const double mu = std::pow(kTwoPi * k / grid_.lz(), 2);
    xre[k] = warm_[2 * k];
    xim[k] = warm_[2 * k + 1];
    solve_mode(k, mu, bre[k], xre[k]);
    solve_mode(k, mu, bim[k], xim[k]);
    warm_[2 * k] = xre[k];
    warm_[2 * k + 1] = xim[k];

    // True relative residual per mode, for the diagnostics surface.
    std::vector<double> ax(n_unknowns_);
    for (int part = 0; part < 2; ++part) {
      const std::vector<double>& bb = part == 0 ? bre[k] : bim[k];
      const std::vector<double>& xx = part == 0 ? xre[k] : xim[k];
      const double bn = norm_v(bb);
      if (bn == 0.0) continue;
      csr_matvec(row_ptr_, col_, val_, mu, diag_pos_, xx, ax);
      double rn = 0.0;
      for (std::int32_t i = 0; i < n_unknowns_; ++i)
        rn += (bb[i] - ax[i]) * (bb[i] - ax[i]);
      worst = std::max(worst, std::sqrt(rn) / bn);
    }
  }
  last_residual_ = worst;

  // Inverse transform; phi vanishes on ghost and exterior nodes.
  std::fill(f.phi.begin(), f.phi.end(), 0.0);
  for (std::int32_t r = 0; r < n_unknowns_; ++r) {
    const std::int32_t node = node_of_[r];
    for (int m = 0; m < nz; ++m) {
      double acc = xre[0][r];
      for (int k = 1; k < nk; ++k) {
        const int tw = static_cast<int>((static_cast<long>(k) * m) % nz);
        const double fac = (nz % 2 == 0 && k == nz / 2) ? 1.0 : 2.0;
        acc += fac * (xre[k][r] * ct[tw] - xim[k][r] * stb[tw]);
      }
      f.phi[slab * m + node] = acc / nz;
    }
  }

  // Ghost-closure phi values per slab feed the one-sided field stencils.
  std::vector<double> gv(cl_.ghosts.size() * static_cast<std::size_t>(nz));
  for (int m = 0; m < nz; ++m)
    for (std::size_t gi = 0; gi < cl_.ghosts.size(); ++gi)
      gv[m * cl_.ghosts.size() + gi] = ghost_value(static_cast<std::int32_t>(gi),
                                                   &f.phi[slab * m]);

  const auto phi_at = [&](int i, int j, int m) {
    const std::size_t nid = g.index(i, j);
    if (cl_.label[nid] == NodeLabel::Interior) return f.phi[slab * m + nid];
    const std::int32_t gi = cl_.ghost_of[nid];
    return gi >= 0 ? gv[m * cl_.ghosts.size() + gi] : 0.0;
  };

  std::fill(f.E.begin(), f.E.end(), Vec3{});
  for (int m = 0; m < nz; ++m) {
    const int mp = (m + 1) % nz;
    const int mm = (m + nz - 1) % nz;
    for (std::int32_t r = 0; r < n_unknowns_; ++r) {
      const std::int32_t node = node_of_[r];
      const int i = node % nx;
      const int j = node / nx;
      Vec3 e;
      e.x = -(phi_at(i + 1, j, m) - phi_at(i - 1, j, m)) / (2.0 * g.dx);
      e.y = -(phi_at(i, j + 1, m) - phi_at(i, j - 1, m)) / (2.0 * g.dy);
      e.z = -(f.phi[slab * mp + node] - f.phi[slab * mm + node]) /
            (2.0 * grid_.dz);
      f.E[slab * m + node] = e;
    }
  }
}

void write_grid_snapshot(const std::string& path, const Grid3& g,
                         const std::vector<double>& values) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path);
  std::fprintf(fp, "# %d %d %d %.17g %.17g %.17g\n", g.xy.nx, g.xy.ny, g.nz,
               g.xy.dx, g.xy.dy, g.dz);
  const std::size_t slab = static_cast<std::size_t>(g.xy.nx) * g.xy.ny;
  for (int m = 0; m < g.nz; ++m) {
    if (m) std::fprintf(fp, "\n");
    for (int j = 0; j < g.xy.ny; ++j) {
      for (int i = 0; i < g.xy.nx; ++i) {
        std::fprintf(fp, "%.17g%c", values[slab * m + g.xy.index(i, j)],
                     i + 1 == g.xy.nx ? '\n' : ' ');
      }
    }
  }
  std::fclose(fp);
}

}  // namespace gyropic
