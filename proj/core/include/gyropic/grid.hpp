// Uniform Cartesian grids. Nodes are vertex-centered: node (i,j) sits at
// (x0 + i*dx, y0 + j*dy). The z direction is periodic with nz cells of
// width dz = lz/nz (node nz coincides with node 0).
#pragma once

#include <cstddef>

#include "gyropic/vec.hpp"

namespace gyropic {

struct Grid2 {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  int nx = 0;  // node count in x
  int ny = 0;

  Vec2 node(int i, int j) const { return {x0 + i * dx, y0 + j * dy}; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
};

struct Grid3 {
  Grid2 xy;
  double z0 = 0.0;
  double dz = 1.0;
  int nz = 1;  // periodic cells (distinct z planes)

  double z(int k) const { return z0 + k * dz; }
  double lz() const { return nz * dz; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * xy.ny + j) * xy.nx + i;
  }
  std::size_t size() const { return xy.size() * static_cast<std::size_t>(nz); }
};

}  // namespace gyropic
