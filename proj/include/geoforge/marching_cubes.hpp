// Table-driven isosurface extraction.

#pragma once

#include "geoforge/grid.hpp"
#include "geoforge/mesh.hpp"

namespace geoforge {

/// Extracts the level set {value == iso} with the classic 256-case table.
/// Points with value < iso are inside; triangles are wound so their normals
/// point from inside to outside. Each grid edge yields at most one shared
/// vertex, so the output is closed whenever the inside region does not touch
/// the grid boundary. Returns an empty mesh when the field has uniform sign.
TriangleMesh marching_cubes(const ScalarGrid& grid, double iso);

}  // namespace geoforge
