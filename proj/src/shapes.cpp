#include "geoforge/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace geoforge::shapes {
namespace {

class Builder {
 public:
  std::uint32_t vertex(const Vec3& p) {
    verts_.push_back(p);
    return static_cast<std::uint32_t>(verts_.size() - 1);
  }
  void tri(std::uint32_t a, std::uint32_t b, std::uint32_t c) { tris_.push_back({a, b, c}); }

  // Quad with corners in cyclic order, wound so its normal agrees with `outward`.
  void quad(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& outward) {
    const bool flip = (p1 - p0).cross(p2 - p0).dot(outward) < 0.0;
    const std::uint32_t a = vertex(p0), b = vertex(p1), c = vertex(p2), d = vertex(p3);
    if (flip) {
      tri(a, c, b);
      tri(a, d, c);
    } else {
      tri(a, b, c);
      tri(a, c, d);
    }
  }

  TriangleMesh finish(std::string name) {
    return TriangleMesh(std::move(verts_), std::move(tris_), std::move(name));
  }

  std::vector<Vec3>& verts() { return verts_; }
  std::vector<Triangle>& tris() { return tris_; }

 private:
  std::vector<Vec3> verts_;
  std::vector<Triangle> tris_;
};

Vec3 axis_point(int axis, double w, int u_axis, double u, int v_axis, double v) {
  Vec3 p;
  p[axis] = w;
  p[u_axis] = u;
  p[v_axis] = v;
  return p;
}

void add_face(Builder& b, const Vec3& lo, const Vec3& hi, int axis, bool positive,
              const std::vector<FaceRect>& holes) {
  const int u_axis = axis == 0 ? 1 : 0;
  const int v_axis = axis == 2 ? 1 : 2;
  const double w = positive ? hi[axis] : lo[axis];
  Vec3 outward = Vec3::Zero();
  outward[axis] = positive ? 1.0 : -1.0;

  std::vector<double> us{lo[u_axis], hi[u_axis]};
  std::vector<double> vs{lo[v_axis], hi[v_axis]};
  for (const FaceRect& h : holes) {
    us.push_back(h.u0);
    us.push_back(h.u1);
    vs.push_back(h.v0);
    vs.push_back(h.v1);
  }
  std::sort(us.begin(), us.end());
  us.erase(std::unique(us.begin(), us.end()), us.end());
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());

  for (std::size_t a = 0; a + 1 < us.size(); ++a) {
    for (std::size_t c = 0; c + 1 < vs.size(); ++c) {
      const double um = 0.5 * (us[a] + us[a + 1]);
      const double vm = 0.5 * (vs[c] + vs[c + 1]);
      const bool in_hole = std::any_of(holes.begin(), holes.end(), [&](const FaceRect& h) {
        return um > h.u0 && um < h.u1 && vm > h.v0 && vm < h.v1;
      });
      if (in_hole) continue;
      b.quad(axis_point(axis, w, u_axis, us[a], v_axis, vs[c]),
             axis_point(axis, w, u_axis, us[a + 1], v_axis, vs[c]),
             axis_point(axis, w, u_axis, us[a + 1], v_axis, vs[c + 1]),
             axis_point(axis, w, u_axis, us[a], v_axis, vs[c + 1]), outward);
    }
  }
}

}  // namespace

TriangleMesh icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& p : v) p.normalize();
  std::vector<Triangle> f = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
  };
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto idx = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(f.size() * 4);
    for (const Triangle& tri : f) {
      const std::uint32_t ab = midpoint(tri[0], tri[1]);
      const std::uint32_t bc = midpoint(tri[1], tri[2]);
      const std::uint32_t ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Vec3& p : v) p = center + radius * p;
  return TriangleMesh(std::move(v), std::move(f), "icosphere");
}

TriangleMesh ellipsoid(const Vec3& radii, int subdivisions, const Vec3& center) {
  const TriangleMesh unit = icosphere(1.0, subdivisions);
  std::vector<Vec3> v;
  v.reserve(unit.vertex_count());
  for (const Vec3& p : unit.vertices()) v.push_back(center + p.cwiseProduct(radii));
  return TriangleMesh(std::move(v), unit.triangles(), "ellipsoid");
}

TriangleMesh box(const Vec3& lo, const Vec3& hi) {
  std::vector<Vec3> v;
  for (int c = 0; c < 8; ++c) {
    v.emplace_back(c & 1 ? hi.x() : lo.x(), c & 2 ? hi.y() : lo.y(), c & 4 ? hi.z() : lo.z());
  }
  std::vector<Triangle> f = {
      {0, 2, 1}, {1, 2, 3},  // -z
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  };
  return TriangleMesh(std::move(v), std::move(f), "box");
}

TriangleMesh open_box(const Vec3& lo, const Vec3& hi) {
  const TriangleMesh closed = box(lo, hi);
  std::vector<Triangle> f = closed.triangles();
  f.erase(f.begin() + 2, f.begin() + 4);
  return TriangleMesh(closed.vertices(), std::move(f), "open_box");
}

TriangleMesh torus(double major, double minor, int major_segments, int minor_segments,
                   const Vec3& center) {
  std::vector<Vec3> v;
  std::vector<Triangle> f;
  const int nu = major_segments;
  const int nv = minor_segments;
  for (int i = 0; i < nu; ++i) {
    const double a = 2.0 * std::numbers::pi * i / nu;
    for (int j = 0; j < nv; ++j) {
      const double b = 2.0 * std::numbers::pi * j / nv;
      const double ring = major + minor * std::cos(b);
      v.push_back(center + Vec3(ring * std::cos(a), ring * std::sin(a), minor * std::sin(b)));
    }
  }
  auto id = [&](int i, int j) { return static_cast<std::uint32_t>((i % nu) * nv + (j % nv)); };
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      f.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      f.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return TriangleMesh(std::move(v), std::move(f), "torus");
}

TriangleMesh cylinder(double radius, double half_height, int segments, const Vec3& center) {
  std::vector<Vec3> v;
  std::vector<Triangle> f;
  const int n = segments;
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * std::numbers::pi * i / n;
    v.push_back(center + Vec3(radius * std::cos(a), radius * std::sin(a), -half_height));
    v.push_back(center + Vec3(radius * std::cos(a), radius * std::sin(a), half_height));
  }
  const auto bottom = static_cast<std::uint32_t>(v.size());
  v.push_back(center + Vec3(0, 0, -half_height));
  const auto top = static_cast<std::uint32_t>(v.size());
  v.push_back(center + Vec3(0, 0, half_height));
  for (int i = 0; i < n; ++i) {
    const auto b0 = static_cast<std::uint32_t>(2 * i);
    const auto t0 = b0 + 1;
    const auto b1 = static_cast<std::uint32_t>(2 * ((i + 1) % n));
    const auto t1 = b1 + 1;
    f.push_back({b0, b1, t1});
    f.push_back({b0, t1, t0});
    f.push_back({bottom, b1, b0});
    f.push_back({top, t0, t1});
  }
  return TriangleMesh(std::move(v), std::move(f), "cylinder");
}

TriangleMesh sheet(double x0, double x1, double y0, double y1, double height) {
  Builder b;
  b.quad({x0, y0, height}, {x1, y0, height}, {x1, y1, height}, {x0, y1, height}, {0, 0, 1});
  return b.finish("sheet");
}

TriangleMesh box_with_holes(const Vec3& lo, const Vec3& hi, int axis, bool positive,
                            const std::vector<FaceRect>& holes) {
  Builder b;
  for (int a = 0; a < 3; ++a) {
    for (bool pos : {false, true}) {
      const bool holed = a == axis && pos == positive;
      add_face(b, lo, hi, a, pos, holed ? holes : std::vector<FaceRect>{});
    }
  }
  return b.finish("box_with_holes");
}

TriangleMesh merge(std::span<const TriangleMesh> parts) {
  std::vector<Vec3> v;
  std::vector<Triangle> f;
  for (const TriangleMesh& m : parts) {
    const auto base = static_cast<std::uint32_t>(v.size());
    v.insert(v.end(), m.vertices().begin(), m.vertices().end());
    for (const Triangle& t : m.triangles()) f.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  return TriangleMesh(std::move(v), std::move(f), "merged");
}

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& offset) {
  std::vector<Vec3> v;
  v.reserve(mesh.vertex_count());
  for (const Vec3& p : mesh.vertices()) v.push_back(p + offset);
  return TriangleMesh(std::move(v), mesh.triangles(), mesh.provenance());
}

}  // namespace geoforge::shapes
