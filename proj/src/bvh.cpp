#include "geoforge/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace geoforge {

// Region-based closest point (Ericson, Real-Time Collision Detection 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                               Vec3* barycentric) {
  auto out = [&](double u, double v, double w) {
    if (barycentric) *barycentric = Vec3(u, v, w);
    return Vec3(u * a + v * b + w * c);
  };
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return out(1, 0, 0);

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return out(0, 1, 0);

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return out(1 - v, v, 0);
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return out(0, 0, 1);

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return out(1 - w, 0, w);
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return out(0, 1 - w, w);
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return out(1 - v - w, v, w);
}

namespace {

template <typename T>
struct EdgeFunctions {
  T u, v, w;
};

template <typename T>
EdgeFunctions<T> edge_functions(T ax, T ay, T bx, T by, T cx, T cy) {
  return {cx * by - cy * bx, ax * cy - ay * cx, bx * ay - by * ax};
}

}  // namespace

// Per-ray part of the watertight test: axis permutation and shear.
struct detail::ShearedRay {
  Vec3 origin;
  int kx = 0, ky = 1, kz = 2;
  double sx = 0.0, sy = 0.0, sz = 0.0;
};

namespace {

using detail::ShearedRay;

ShearedRay shear_ray(const Vec3& origin, const Vec3& dir) {
  ShearedRay r;
  r.origin = origin;
  dir.cwiseAbs().maxCoeff(&r.kz);
  r.kx = (r.kz + 1) % 3;
  r.ky = (r.kx + 1) % 3;
  if (dir[r.kz] < 0.0) std::swap(r.kx, r.ky);
  r.sx = dir[r.kx] / dir[r.kz];
  r.sy = dir[r.ky] / dir[r.kz];
  r.sz = 1.0 / dir[r.kz];
  return r;
}

double intersect_sheared(const ShearedRay& r, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 pa = a - r.origin;
  const Vec3 pb = b - r.origin;
  const Vec3 pc = c - r.origin;
  const double ax = pa[r.kx] - r.sx * pa[r.kz];
  const double ay = pa[r.ky] - r.sy * pa[r.kz];
  const double bx = pb[r.kx] - r.sx * pb[r.kz];
  const double by = pb[r.ky] - r.sy * pb[r.kz];
  const double cx = pc[r.kx] - r.sx * pc[r.kz];
  const double cy = pc[r.ky] - r.sy * pc[r.kz];

  auto [u, v, w] = edge_functions(ax, ay, bx, by, cx, cy);
  if (u == 0.0 || v == 0.0 || w == 0.0) {
    // Exact-zero edge values: re-evaluate in extended precision.
    using L = long double;
    const auto e = edge_functions<L>(ax, ay, bx, by, cx, cy);
    u = static_cast<double>(e.u);
    v = static_cast<double>(e.v);
    w = static_cast<double>(e.w);
  }
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return -1.0;
  const double det = u + v + w;
  if (det == 0.0) return -1.0;
  const double t_scaled = u * (r.sz * pa[r.kz]) + v * (r.sz * pb[r.kz]) + w * (r.sz * pc[r.kz]);
  const double t = t_scaled / det;
  return t >= 0.0 ? t : -1.0;
}

}  // namespace

// Woop, Benthin, Wald: "Watertight Ray/Triangle Intersection", JCGT 2013.
double intersect_ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b,
                              const Vec3& c) {
  return intersect_sheared(shear_ray(origin, dir), a, b, c);
}

namespace {

constexpr int kBins = 16;
constexpr std::size_t kMaxDepth = 64;
constexpr std::size_t kForceMedianDepth = 48;

constexpr std::size_t kMaxNeighbours = 24;

struct RaySetup {
  Vec3 origin;
  Vec3 inv;
  std::array<int, 3> near{};  // offsets into {lo, hi} as six doubles
  std::array<int, 3> far{};
  double t_min;
};

RaySetup setup_ray(const Vec3& o, const Vec3& d, double t_min) {
  RaySetup r{o, Vec3::Zero(), {}, {}, t_min};
  for (int a = 0; a < 3; ++a) {
    // A huge finite slope keeps axis-parallel rays free of 0 * inf.
    r.inv[a] = d[a] != 0.0 ? 1.0 / d[a] : 1e300;
    const bool neg = d[a] < 0.0;
    r.near[a] = neg ? 3 + a : a;
    r.far[a] = neg ? a : 3 + a;
  }
  return r;
}

// Slab test returning the entry parameter, or infinity on a miss. Boxes are
// padded at build time so rounding here never culls an accepted triangle.
inline double ray_box_entry(const Aabb& box, const RaySetup& r) {
  static_assert(sizeof(Aabb) == 6 * sizeof(double));
  const double* b = box.lo.data();
  const double x0 = (b[r.near[0]] - r.origin[0]) * r.inv[0];
  const double y0 = (b[r.near[1]] - r.origin[1]) * r.inv[1];
  const double z0 = (b[r.near[2]] - r.origin[2]) * r.inv[2];
  const double x1 = (b[r.far[0]] - r.origin[0]) * r.inv[0];
  const double y1 = (b[r.far[1]] - r.origin[1]) * r.inv[1];
  const double z1 = (b[r.far[2]] - r.origin[2]) * r.inv[2];
  const double t0 = std::max(std::max(x0, y0), std::max(z0, r.t_min));
  const double t1 = std::min(std::min(x1, y1), z1);
  return t0 <= t1 ? t0 : std::numeric_limits<double>::infinity();
}

struct PositionHash {
  std::size_t operator()(const Vec3& p) const {
    std::size_t h = 0;
    for (int a = 0; a < 3; ++a) h = h * 1000003u ^ std::hash<double>()(p[a]);
    return h;
  }
};

}  // namespace

TriangleBvh::TriangleBvh(const TriangleMesh& mesh, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (mesh.empty()) throw InvalidArgument("cannot build a BVH over an empty mesh");
  const auto n = static_cast<std::uint32_t>(mesh.triangle_count());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  std::vector<Vec3> centroids(n);
  std::vector<Aabb> tri_boxes(n);
  for (std::uint32_t t = 0; t < n; ++t) {
    const auto [a, b, c] = mesh.corners(t);
    centroids[t] = (a + b + c) / 3.0;
    tri_boxes[t].grow(a);
    tri_boxes[t].grow(b);
    tri_boxes[t].grow(c);
  }
  nodes_.reserve(2 * n / leaf_size_ + 1);
  build(0, n, 1, centroids, tri_boxes);

  tris_.resize(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    const auto [a, b, c] = mesh.corners(order_[s]);
    tris_[s] = {a, b, c};
  }
  // Children always follow their parent, so a reverse sweep sees them first.
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& node = nodes_[i];
    node.box = Aabb();
    if (node.leaf()) {
      for (std::uint32_t s = node.index; s < node.index + node.count; ++s) {
        for (const Vec3& v : tris_[s]) node.box.grow(v);
      }
    } else {
      node.box.grow(nodes_[i + 1].box);
      node.box.grow(nodes_[node.index].box);
    }
  }
  // Pad every box so rounding in the slab test can never cull a triangle the
  // exact primitive test would accept.
  const Aabb& root = nodes_.front().box;
  const double pad = 1e-9 * (1.0 + std::max(root.lo.cwiseAbs().maxCoeff(), root.hi.cwiseAbs().maxCoeff()));
  for (Node& node : nodes_) {
    node.box.lo.array() -= pad;
    node.box.hi.array() += pad;
  }
  build_adjacency(mesh);
}

void TriangleBvh::build_adjacency(const TriangleMesh& mesh) {
  // Weld by exact position so unshared corners still count as adjacent.
  std::unordered_map<Vec3, std::uint32_t, PositionHash> ids;
  std::vector<std::uint32_t> corner_id(mesh.vertex_count());
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    corner_id[v] = ids.emplace(mesh.vertices()[v], static_cast<std::uint32_t>(ids.size())).first->second;
  }
  std::vector<std::uint32_t> slot_of(order_.size());
  for (std::uint32_t s = 0; s < order_.size(); ++s) slot_of[order_[s]] = s;
  std::vector<std::vector<std::uint32_t>> incident(ids.size());
  for (std::uint32_t s = 0; s < order_.size(); ++s) {
    for (std::uint32_t v : mesh.triangles()[order_[s]]) incident[corner_id[v]].push_back(s);
  }
  adj_start_.assign(1, 0);
  std::vector<std::uint32_t> ring;
  for (std::uint32_t s = 0; s < order_.size(); ++s) {
    ring.clear();
    for (std::uint32_t v : mesh.triangles()[order_[s]]) {
      for (std::uint32_t o : incident[corner_id[v]]) {
        if (o != s) ring.push_back(o);
      }
    }
    std::sort(ring.begin(), ring.end());
    ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
    if (ring.size() > kMaxNeighbours) ring.resize(kMaxNeighbours);
    adj_.insert(adj_.end(), ring.begin(), ring.end());
    adj_start_.push_back(static_cast<std::uint32_t>(adj_.size()));
  }
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end, std::size_t depth,
                                 const std::vector<Vec3>& centroids,
                                 const std::vector<Aabb>& tri_boxes) {
  depth_ = std::max(depth_, depth);
  const auto node_index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  Aabb cbox;
  for (std::uint32_t s = begin; s < end; ++s) {
    const std::uint32_t t = order_[s];
    cbox.grow(centroids[t]);
  }
  const std::uint32_t count = end - begin;
  if (count <= leaf_size_ || depth >= kMaxDepth) {
    nodes_[node_index].index = begin;
    nodes_[node_index].count = count;
    return node_index;
  }

  std::uint32_t mid = begin;
  const Vec3 cext = cbox.extent();
  bool use_median = depth >= kForceMedianDepth || !(cext.maxCoeff() > 0.0);

  if (!use_median) {
    // SAH over 16 centroid bins per axis; the first strictly better candidate
    // wins, so ties go to the lower axis and the lower bin.
    double best_cost = std::numeric_limits<double>::infinity();
    int best_axis = -1;
    int best_split = -1;
    for (int axis = 0; axis < 3; ++axis) {
      if (!(cext[axis] > 0.0)) continue;
      std::array<Aabb, kBins> bin_box;
      std::array<std::uint32_t, kBins> bin_count{};
      const double scale = kBins / cext[axis];
      for (std::uint32_t s = begin; s < end; ++s) {
        const std::uint32_t t = order_[s];
        int b = static_cast<int>((centroids[t][axis] - cbox.lo[axis]) * scale);
        b = std::clamp(b, 0, kBins - 1);
        ++bin_count[b];
        bin_box[b].grow(tri_boxes[t]);
      }
      std::array<double, kBins> right_area{};
      std::array<std::uint32_t, kBins> right_count{};
      Aabb acc;
      std::uint32_t cnt = 0;
      for (int b = kBins - 1; b > 0; --b) {
        acc.grow(bin_box[b]);
        cnt += bin_count[b];
        right_area[b] = acc.surface_area();
        right_count[b] = cnt;
      }
      acc = Aabb();
      cnt = 0;
      for (int b = 0; b < kBins - 1; ++b) {
        acc.grow(bin_box[b]);
        cnt += bin_count[b];
        if (cnt == 0 || right_count[b + 1] == 0) continue;
        const double cost = acc.surface_area() * cnt + right_area[b + 1] * right_count[b + 1];
        if (cost < best_cost) {
          best_cost = cost;
          best_axis = axis;
          best_split = b;
        }
      }
    }
    if (best_axis < 0) {
      use_median = true;
    } else {
      const double scale = kBins / cext[best_axis];
      auto it = std::stable_partition(
          order_.begin() + begin, order_.begin() + end, [&](std::uint32_t t) {
            int b = static_cast<int>((centroids[t][best_axis] - cbox.lo[best_axis]) * scale);
            return std::clamp(b, 0, kBins - 1) <= best_split;
          });
      mid = static_cast<std::uint32_t>(it - order_.begin());
      if (mid == begin || mid == end) use_median = true;
    }
  }

  if (use_median) {
    int axis = 0;
    cext.maxCoeff(&axis);
    std::stable_sort(order_.begin() + begin, order_.begin() + end,
                     [&](std::uint32_t x, std::uint32_t y) {
                       if (centroids[x][axis] != centroids[y][axis]) {
                         return centroids[x][axis] < centroids[y][axis];
                       }
                       return x < y;
                     });
    mid = begin + count / 2;
  }

  build(begin, mid, depth + 1, centroids, tri_boxes);
  const std::uint32_t right = build(mid, end, depth + 1, centroids, tri_boxes);
  nodes_[node_index].index = right;
  nodes_[node_index].count = 0;
  return node_index;
}

ClosestHit TriangleBvh::closest_point(const Vec3& p) const {
  Hint hint;
  return closest_point(p, hint);
}

ClosestHit TriangleBvh::closest_point(const Vec3& p, Hint& hint) const {
  double best = std::numeric_limits<double>::infinity();
  std::uint32_t best_slot = kNoSlot;
  Vec3 best_foot = Vec3::Zero();
  Vec3 best_bary = Vec3::Zero();

  // Ties on distance resolve to the lower source index, which makes the
  // result independent of traversal order and of the hint.
  auto consider = [&](std::uint32_t slot) {
    const auto& t = tris_[slot];
    Vec3 bary;
    const Vec3 foot = closest_point_on_triangle(p, t[0], t[1], t[2], &bary);
    const double d2 = (foot - p).squaredNorm();
    if (d2 < best || (d2 == best && order_[slot] < order_[best_slot])) {
      best = d2;
      best_slot = slot;
      best_foot = foot;
      best_bary = bary;
    }
  };

  if (hint.slot != kNoSlot && hint.slot < tris_.size()) consider(hint.slot);

  std::uint32_t stack[2 * kMaxDepth + 2];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(p) > best) continue;
    if (node.leaf()) {
      for (std::uint32_t s = node.index; s < node.index + node.count; ++s) consider(s);
      continue;
    }
    const std::uint32_t left = static_cast<std::uint32_t>(&node - nodes_.data()) + 1;
    const std::uint32_t right = node.index;
    const double dl = nodes_[left].box.squared_distance(p);
    const double dr = nodes_[right].box.squared_distance(p);
    // Push the farther child first so the nearer one is explored next.
    if (dl <= dr) {
      if (dr <= best) stack[top++] = right;
      if (dl <= best) stack[top++] = left;
    } else {
      if (dl <= best) stack[top++] = left;
      if (dr <= best) stack[top++] = right;
    }
  }

  hint.slot = best_slot;
  ClosestHit hit;
  hit.distance = std::sqrt(best);
  hit.triangle = order_[best_slot];
  hit.foot = best_foot;
  hit.barycentric = best_bary;
  return hit;
}

bool TriangleBvh::slot_blocks(std::uint32_t slot, const ShearedRay& ray, double t_min) const {
  const auto& t = tris_[slot];
  return intersect_sheared(ray, t[0], t[1], t[2]) > t_min;
}

bool TriangleBvh::any_ray_escape(const Vec3& origin, const Vec3& dir, double t_min) const {
  Hint hint;
  return any_ray_escape(origin, dir, t_min, hint);
}

bool TriangleBvh::any_ray_escape(const Vec3& origin, const Vec3& dir, double t_min,
                                 Hint& hint) const {
  // Any single blocking triangle decides the answer, so the blocker found for
  // a neighbouring probe and the triangles around it are tried first.
  const ShearedRay sheared = shear_ray(origin, dir);
  if (hint.slot != kNoSlot && hint.slot < tris_.size()) {
    if (slot_blocks(hint.slot, sheared, t_min)) return false;
    for (std::uint32_t a = adj_start_[hint.slot]; a < adj_start_[hint.slot + 1]; ++a) {
      if (slot_blocks(adj_[a], sheared, t_min)) {
        hint.slot = adj_[a];
        return false;
      }
    }
  }
  const RaySetup ray = setup_ray(origin, dir, t_min);
  constexpr double kMiss = std::numeric_limits<double>::infinity();
  if (ray_box_entry(nodes_[0].box, ray) == kMiss) return true;

  std::uint32_t stack[2 * kMaxDepth + 2];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const std::uint32_t ni = stack[--top];
    const Node& node = nodes_[ni];
    if (node.leaf()) {
      for (std::uint32_t s = node.index; s < node.index + node.count; ++s) {
        if (slot_blocks(s, sheared, t_min)) {
          hint.slot = s;
          return false;
        }
      }
      continue;
    }
    const std::uint32_t left = ni + 1;
    const std::uint32_t right = node.index;
    const double tl = ray_box_entry(nodes_[left].box, ray);
    const double tr = ray_box_entry(nodes_[right].box, ray);
    // Nearer child on top of the stack.
    if (tl <= tr) {
      if (tr != kMiss) stack[top++] = right;
      if (tl != kMiss) stack[top++] = left;
    } else {
      if (tl != kMiss) stack[top++] = left;
      if (tr != kMiss) stack[top++] = right;
    }
  }
  return true;
}

}  // namespace geoforge
