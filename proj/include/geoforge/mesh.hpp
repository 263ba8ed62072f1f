// Triangle meshes: construction, normalization and exact mesh-level measures.

#pragma once

#include "geoforge/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace geoforge {

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle soup. Immutable once constructed; the constructor
/// enforces the index, distinctness and finiteness invariants.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
               std::string provenance = {}, std::size_t dropped_degenerate = 0);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::string& provenance() const { return provenance_; }
  /// Number of degenerate faces removed while building this mesh.
  std::size_t dropped_degenerate() const { return dropped_degenerate_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  std::array<Vec3, 3> corners(std::size_t t) const {
    const Triangle& f = triangles_[t];
    return {vertices_[f[0]], vertices_[f[1]], vertices_[f[2]]};
  }

  Aabb bounds() const;
  double surface_area() const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::string provenance_;
  std::size_t dropped_degenerate_ = 0;
};

/// Builds a mesh from raw faces, dropping faces that repeat a vertex or whose
/// area is below 1e-12 in normalized units (measured relative to the half
/// extent of the longest bounding-box axis). Throws if nothing survives.
TriangleMesh mesh_from_faces(std::vector<Vec3> vertices, const std::vector<Triangle>& faces,
                             std::string provenance = {});

/// Maps p to (p - center) * scale.
struct NormalizationTransform {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
  Vec3 inverse(const Vec3& q) const { return q / scale + center; }
  /// Transform whose apply() is this one's inverse().
  NormalizationTransform inverted() const { return {-center * scale, 1.0 / scale}; }
};

inline constexpr double kDefaultMargin = 0.02;

/// Centers the bounding box at the origin and scales the longest axis to span
/// 2 * (1 - margin), i.e. the mesh ends up inside [-1+margin, 1-margin]^3.
std::pair<TriangleMesh, NormalizationTransform> normalize_mesh(const TriangleMesh& mesh,
                                                               double margin = kDefaultMargin);

TriangleMesh transform_mesh(const TriangleMesh& mesh, const NormalizationTransform& xf);

/// Signed volume as the sum of signed tetrahedra against the origin. Only
/// meaningful (positive, translation invariant) for closed meshes with
/// outward orientation; pair with is_watertight.
double mesh_volume(const TriangleMesh& mesh);

struct WatertightReport {
  bool watertight = false;
  std::size_t boundary_edges = 0;     // undirected edges with one incident face
  std::size_t nonmanifold_edges = 0;  // undirected edges with more than two faces
  std::size_t inconsistent_edges = 0; // two faces, same direction
};

/// True iff every undirected edge is shared by exactly two triangles that
/// traverse it in opposite directions.
WatertightReport is_watertight(const TriangleMesh& mesh);

/// Connected components over shared vertices.
std::size_t count_components(const TriangleMesh& mesh);

}  // namespace geoforge
