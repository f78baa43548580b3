// Cylinder cross-section D (disk or Miller D-shape): membership tests,
// nearest-boundary projections with inward normals, and classification of
// Cartesian grid nodes into interior / ghost / exterior for the embedded
// boundary solver.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gyropic/grid.hpp"
#include "gyropic/vec.hpp"

namespace gyropic {

enum class DomainKind { Disk, DShape };

struct DomainSpec {
  DomainKind kind = DomainKind::Disk;
  Vec2 center{0.0, 0.0};
  double radius = 6.0;           // disk only
  double scale = 10.0;           // D-shape xi1 range [0, scale]
  double triangularity = 0.0;    // D-shape angle shift amplitude (radians)
  double elongation = 1.66;      // D-shape vertical stretch
  double lz = 1.0;               // periodic length of the cylinder axis

  static DomainSpec disk(const Vec2& c, double r, double lz);
  static DomainSpec dshape(const Vec2& c, double r0, double lz);
};

// Miller-type mapping; constant-xi2 curves are straight rays from the
// center, so the shape is star-shaped and invertible by angle search.
//   x = x_c + xi1 cos(xi2 + triang * sin xi2),  y = y_c + elong * xi1 sin xi2.
Vec2 map_dshape(const DomainSpec& d, double xi1, double xi2);

// Strict interior test.
bool contains(const DomainSpec& d, const Vec2& p);

// Distance from the center to the boundary along the ray through p.
// (Disk: radius. Used for membership and as the bisection fallback.)
double boundary_radius_towards(const DomainSpec& d, const Vec2& p);

struct BoundaryTrace {
  Vec2 xp;      // nearest boundary point
  Vec2 normal;  // inward unit normal at xp
  double sg;    // signed distance of the query along the normal axis, < 0 outside
};

struct NoIntersection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Projects an exterior point near the boundary onto it. Disk: closed form.
// D-shape: Newton on the nearest-point condition (tolerance 1e-12 * scale),
// falling back to the radial-ray intersection if Newton strays.
BoundaryTrace boundary_trace(const DomainSpec& d, const Vec2& xg);

enum class NodeLabel : std::uint8_t { Interior, Ghost, Exterior };

struct GhostNode {
  int i = 0;
  int j = 0;
  BoundaryTrace trace;
};

struct GridClassification {
  int nx = 0;
  int ny = 0;
  std::vector<NodeLabel> label;       // nx*ny, row-major (j outer)
  std::vector<std::uint8_t> regular;  // interior node with 4 interior neighbors
  std::vector<std::int32_t> ghost_of; // node -> index into ghosts, or -1
  std::vector<GhostNode> ghosts;

  NodeLabel at(int i, int j) const { return label[static_cast<std::size_t>(j) * nx + i]; }
};

// Labels every node. Ghost nodes are exterior nodes that appear in the
// five-point stencil of at least one interior node; each carries its
// boundary trace.
GridClassification classify(const Grid2& g, const DomainSpec& d);

// Tight bounding box of D (disk: exact; D-shape: dense boundary sweep).
struct Box2 {
  Vec2 lo;
  Vec2 hi;
};
Box2 bounding_box(const DomainSpec& d);

}  // namespace gyropic
