// OBJ / PLY reading and writing.

#pragma once

#include "geoforge/mesh.hpp"

#include <filesystem>

namespace geoforge {

struct LoadOptions {
  /// Drop repeated-index and near-zero-area faces. When false only faces
  /// that repeat a vertex index are dropped (they cannot be represented).
  bool drop_degenerate = true;
};

/// Reads OBJ (v/f records) or PLY (ascii, binary little endian). Polygons are
/// fan-triangulated from their first vertex.
TriangleMesh load_mesh(const std::filesystem::path& path, const LoadOptions& options = {});

/// Writes OBJ or binary little-endian PLY, chosen by extension. Vertex
/// coordinates are stored as 32-bit floats in both formats.
void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh);

std::string mesh_to_obj(const TriangleMesh& mesh);
std::string mesh_to_ply(const TriangleMesh& mesh);

}  // namespace geoforge
