// Bounding volume hierarchy over mesh triangles: exact closest-point queries
// (the unsigned distance kernel) and watertight any-hit ray tests.

#pragma once

#include "geoforge/mesh.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace geoforge {

namespace detail {
struct ShearedRay;
}

/// Ray hits at parameter t <= t_min are ignored so that probes starting on or
/// next to the surface do not hit themselves.
inline constexpr double kDefaultRayTMin = 1e-4;

struct ClosestHit {
  double distance = 0.0;
  std::uint32_t triangle = 0;  // index into the source mesh
  Vec3 foot = Vec3::Zero();
  Vec3 barycentric = Vec3::Zero();  // weights of the triangle's three corners
};

/// Closest point on triangle (a, b, c) to p, with barycentric weights.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* barycentric = nullptr);

/// Watertight ray/triangle test: returns the hit parameter, or a negative
/// value on a miss. Rays through an edge shared by two triangles hit at least
/// one of them.
double intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                              const Vec3& c);

class TriangleBvh {
 public:
  struct Node {
    Aabb box;
    // Interior: right child index (left child is the next node).
    // Leaf: first slot of its triangle range.
    std::uint32_t index = 0;
    std::uint32_t count = 0;  // > 0 marks a leaf
    bool leaf() const { return count > 0; }
  };

  /// Seed for coherent query sequences: remembers the last useful triangle so
  /// the next nearby query can start from a tight bound.
  struct Hint {
    std::uint32_t slot = kNoSlot;
  };
  static constexpr std::uint32_t kNoSlot = 0xffffffffu;

  TriangleBvh(const TriangleMesh& mesh, std::size_t leaf_size = 4);

  ClosestHit closest_point(const Vec3& p) const;
  ClosestHit closest_point(const Vec3& p, Hint& hint) const;

  /// True iff the ray origin + t * dir, t > t_min, meets no triangle.
  bool any_ray_escape(const Vec3& origin, const Vec3& dir, double t_min = kDefaultRayTMin) const;
  bool any_ray_escape(const Vec3& origin, const Vec3& dir, double t_min, Hint& hint) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  /// Slot -> source triangle index; slots are the leaf storage order.
  const std::vector<std::uint32_t>& order() const { return order_; }
  std::size_t leaf_size() const { return leaf_size_; }
  std::size_t triangle_count() const { return order_.size(); }
  std::size_t depth() const { return depth_; }
  const Aabb& bounds() const { return nodes_.front().box; }
  /// Corners of the triangle stored at a slot.
  const std::array<Vec3, 3>& slot_triangle(std::uint32_t slot) const { return tris_[slot]; }

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t depth,
                      const std::vector<Vec3>& centroids, const std::vector<Aabb>& tri_boxes);
  bool slot_blocks(std::uint32_t slot, const detail::ShearedRay& ray, double t_min) const;
  void build_adjacency(const TriangleMesh& mesh);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<std::array<Vec3, 3>> tris_;
  // Slots sharing a corner position with each slot (CSR), tried after a
  // stale ray hint.
  std::vector<std::uint32_t> adj_start_;
  std::vector<std::uint32_t> adj_;
  std::size_t leaf_size_;
  std::size_t depth_ = 0;
};

}  // namespace geoforge
