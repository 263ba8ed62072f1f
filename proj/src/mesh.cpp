#include "geoforge/mesh.hpp"

#include <cmath>
#include <numeric>
#include <unordered_map>

namespace geoforge {

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles,
                           std::string provenance, std::size_t dropped_degenerate)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      provenance_(std::move(provenance)),
      dropped_degenerate_(dropped_degenerate) {
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw InvalidArgument("non-finite vertex coordinate");
  }
  const auto n = static_cast<std::uint32_t>(vertices_.size());
  for (const Triangle& t : triangles_) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) throw InvalidArgument("triangle index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw InvalidArgument("triangle references the same vertex twice");
    }
  }
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices_) box.grow(v);
  return box;
}

double TriangleMesh::surface_area() const {
  double area = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto [a, b, c] = corners(t);
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

TriangleMesh mesh_from_faces(std::vector<Vec3> vertices, const std::vector<Triangle>& faces,
                             std::string provenance) {
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) throw InvalidArgument("non-finite coordinates in " + provenance);
  }
  Aabb box;
  for (const Triangle& f : faces) {
    for (std::uint32_t i : f) {
      if (i >= vertices.size()) throw InvalidArgument("face index out of range in " + provenance);
      box.grow(vertices[i]);
    }
  }
  // Area threshold expressed in the normalized frame: half of the longest
  // axis maps to ~1.
  const double half = box.empty() ? 0.0 : 0.5 * box.extent().maxCoeff();
  const double min_area = 1e-12 * half * half;

  std::vector<Triangle> kept;
  kept.reserve(faces.size());
  std::size_t dropped = 0;
  for (const Triangle& f : faces) {
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      ++dropped;
      continue;
    }
    const Vec3& a = vertices[f[0]];
    const double area = 0.5 * (vertices[f[1]] - a).cross(vertices[f[2]] - a).norm();
    if (!(area > min_area)) {
      ++dropped;
      continue;
    }
    kept.push_back(f);
  }
  if (kept.empty()) throw InvalidArgument("zero valid triangles in " + provenance);
  return TriangleMesh(std::move(vertices), std::move(kept), std::move(provenance), dropped);
}

std::pair<TriangleMesh, NormalizationTransform> normalize_mesh(const TriangleMesh& mesh,
                                                               double margin) {
  if (mesh.empty()) throw InvalidArgument("cannot normalize an empty mesh");
  if (!(margin >= 0.0 && margin < 0.5)) throw InvalidArgument("margin must lie in [0, 0.5)");
  const Aabb box = mesh.bounds();
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) throw InvalidArgument("zero-extent mesh");
  NormalizationTransform xf;
  xf.center = box.center();
  xf.scale = 2.0 * (1.0 - margin) / longest;
  return {transform_mesh(mesh, xf), xf};
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const NormalizationTransform& xf) {
  std::vector<Vec3> verts;
  verts.reserve(mesh.vertex_count());
  for (const Vec3& v : mesh.vertices()) verts.push_back(xf.apply(v));
  return TriangleMesh(std::move(verts), mesh.triangles(), mesh.provenance(),
                      mesh.dropped_degenerate());
}

double mesh_volume(const TriangleMesh& mesh) {
  double six_vol = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto [a, b, c] = mesh.corners(t);
    six_vol += a.dot(b.cross(c));
  }
  return six_vol / 6.0;
}

namespace {

struct EdgeUse {
  std::uint32_t forward = 0;   // traversed lo -> hi
  std::uint32_t backward = 0;  // traversed hi -> lo
};

}  // namespace

WatertightReport is_watertight(const TriangleMesh& mesh) {
  std::unordered_map<std::uint64_t, EdgeUse> edges;
  edges.reserve(mesh.triangle_count() * 2);
  for (const Triangle& t : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = t[k];
      const std::uint32_t b = t[(k + 1) % 3];
      const std::uint64_t key =
          (std::uint64_t{std::min(a, b)} << 32) | std::uint64_t{std::max(a, b)};
      EdgeUse& use = edges[key];
      if (a < b) {
        ++use.forward;
      } else {
        ++use.backward;
      }
    }
  }
  WatertightReport report;
  for (const auto& [key, use] : edges) {
    const std::uint32_t total = use.forward + use.backward;
    if (total == 1) {
      ++report.boundary_edges;
    } else if (total > 2) {
      ++report.nonmanifold_edges;
    } else if (use.forward != 1) {
      ++report.inconsistent_edges;
    }
  }
  report.watertight = !mesh.empty() && report.boundary_edges == 0 &&
                      report.nonmanifold_edges == 0 && report.inconsistent_edges == 0;
  return report;
}

std::size_t count_components(const TriangleMesh& mesh) {
  std::vector<std::uint32_t> parent(mesh.vertex_count());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const Triangle& t : mesh.triangles()) {
    for (int k = 1; k < 3; ++k) {
      const std::uint32_t a = find(t[0]);
      const std::uint32_t b = find(t[k]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<char> is_root(mesh.vertex_count(), 0);
  std::size_t count = 0;
  for (const Triangle& t : mesh.triangles()) {
    const std::uint32_t r = find(t[0]);
    if (!is_root[r]) {
      is_root[r] = 1;
      ++count;
    }
  }
  return count;
}

}  // namespace geoforge
