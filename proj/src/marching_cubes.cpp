#include "geoforge/marching_cubes.hpp"

#include "mc_tables.hpp"

#include <array>

namespace geoforge {
namespace {

constexpr std::uint32_t kNone = 0xffffffffu;

// Corner offsets in table order.
constexpr std::array<std::array<int, 3>, 8> kCorner = {{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

// Each cube edge as (lower grid point offset, axis).
struct EdgeRef {
  int dx, dy, dz, axis;
};
constexpr std::array<EdgeRef, 12> kEdge = {{
    {0, 0, 0, 0}, {1, 0, 0, 1}, {0, 1, 0, 0}, {0, 0, 0, 1},
    {0, 0, 1, 0}, {1, 0, 1, 1}, {0, 1, 1, 0}, {0, 0, 1, 1},
    {0, 0, 0, 2}, {1, 0, 0, 2}, {1, 1, 0, 2}, {0, 1, 0, 2},
}};

}  // namespace

TriangleMesh marching_cubes(const ScalarGrid& grid, double iso) {
  const int r = grid.resolution();
  if (r < 2) return {};
  const GridShape& shape = grid.shape;
  const std::size_t plane = static_cast<std::size_t>(r) * r;

  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;

  // Vertex ids for x/y edges on the slice below and above the current cell
  // layer, and for z edges between them.
  std::vector<std::uint32_t> xy_lo(plane * 2, kNone);
  std::vector<std::uint32_t> xy_hi(plane * 2, kNone);
  std::vector<std::uint32_t> z_mid(plane, kNone);

  auto edge_vertex = [&](int i, int j, int k, int cell_k, const EdgeRef& e) -> std::uint32_t {
    const int gi = i + e.dx;
    const int gj = j + e.dy;
    const int gk = k + e.dz;
    std::uint32_t* slot;
    const std::size_t in_plane = static_cast<std::size_t>(gi) + static_cast<std::size_t>(r) * gj;
    if (e.axis == 2) {
      slot = &z_mid[in_plane];
    } else {
      auto& layer = gk == cell_k ? xy_lo : xy_hi;
      slot = &layer[in_plane * 2 + e.axis];
    }
    if (*slot != kNone) return *slot;
    const Vec3 a = shape.point(gi, gj, gk);
    Vec3 b = a;
    b[e.axis] = shape.coord((e.axis == 0 ? gi : e.axis == 1 ? gj : gk) + 1);
    const double va = grid.at(gi, gj, gk);
    const double vb = grid.at(gi + (e.axis == 0), gj + (e.axis == 1), gk + (e.axis == 2));
    const double t = (iso - va) / (vb - va);
    *slot = static_cast<std::uint32_t>(vertices.size());
    vertices.push_back(a + t * (b - a));
    return *slot;
  };

  for (int k = 0; k + 1 < r; ++k) {
    for (int j = 0; j + 1 < r; ++j) {
      for (int i = 0; i + 1 < r; ++i) {
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          if (grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]) < iso) cube |= 1 << c;
        }
        if (cube == 0 || cube == 255) continue;
        const auto& row = detail::kMcTriTable[cube];
        for (int t = 0; row[t] >= 0; t += 3) {
          const std::uint32_t a = edge_vertex(i, j, k, k, kEdge[row[t]]);
          const std::uint32_t b = edge_vertex(i, j, k, k, kEdge[row[t + 1]]);
          const std::uint32_t c = edge_vertex(i, j, k, k, kEdge[row[t + 2]]);
          // The table winds toward the inside corners; reverse for outward normals.
          triangles.push_back({a, c, b});
        }
      }
    }
    std::swap(xy_lo, xy_hi);
    std::fill(xy_hi.begin(), xy_hi.end(), kNone);
    std::fill(z_mid.begin(), z_mid.end(), kNone);
  }
  if (triangles.empty()) return {};
  return TriangleMesh(std::move(vertices), std::move(triangles), "marching_cubes");
}

}  // namespace geoforge
