#include "geoforge/sampling.hpp"

#include "geoforge/log.hpp"
#include "geoforge/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geoforge {
namespace {

// Vose alias table over triangle areas plus a single RNG stream.
class SurfaceSampler {
 public:
  SurfaceSampler(const TriangleMesh& mesh, std::uint64_t seed) : mesh_(mesh), rng_(seed) {
    const std::size_t n = mesh.triangle_count();
    std::vector<double> area(n);
    double total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const auto [a, b, c] = mesh.corners(t);
      area[t] = 0.5 * (b - a).cross(c - a).norm();
      total += area[t];
    }
    if (!(total > 0.0)) throw InvalidArgument("cannot sample a zero-area mesh");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t t = 0; t < n; ++t) {
      scaled[t] = area[t] * static_cast<double>(n) / total;
      (scaled[t] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(t));
    }
    while (!small.empty() && !large.empty()) {
      const std::uint32_t s = small.back();
      small.pop_back();
      const std::uint32_t l = large.back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (std::uint32_t t : large) prob_[t] = 1.0;
    for (std::uint32_t t : small) prob_[t] = 1.0;
  }

  std::size_t pick_triangle() {
    const auto i = static_cast<std::size_t>(rng_.below(prob_.size()));
    return rng_.uniform() < prob_[i] ? i : alias_[i];
  }

  Vec3 next() {
    const std::size_t t = pick_triangle();
    const auto [a, b, c] = mesh_.corners(t);
    const double s = std::sqrt(rng_.uniform());
    const double r2 = rng_.uniform();
    return (1.0 - s) * a + s * (1.0 - r2) * b + s * r2 * c;
  }

 private:
  const TriangleMesh& mesh_;
  Rng rng_;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

Vec3 to_float_precision(const Vec3& p) { return {round_to_float(p.x()), round_to_float(p.y()), round_to_float(p.z())}; }

}  // namespace

void SamplingSpec::validate() const {
  if (surface_sizes.empty()) throw InvalidArgument("at least one surface size is required");
  if (downsample_ratio == 0) throw InvalidArgument("downsample ratio must be positive");
  for (std::size_t n : surface_sizes) {
    if (n == 0 || n % downsample_ratio != 0) {
      throw InvalidArgument("surface size " + std::to_string(n) + " is not divisible by the downsample ratio");
    }
  }
  if (!(near_sigma >= 0.0)) throw InvalidArgument("near-surface sigma must be nonnegative");
}

std::size_t ConditionPayload::length() const {
  switch (kind) {
    case PayloadKind::voxel16:
      return voxels.size();
    case PayloadKind::bbox8:
      return corners.size();
    case PayloadKind::sparse512:
      return points.size();
    case PayloadKind::partial2056:
      return points.size() + corners.size();
  }
  return 0;
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.empty()) throw InvalidArgument("cannot sample an empty mesh");
  if (std::find(kStandardSurfaceSizes.begin(), kStandardSurfaceSizes.end(), count) ==
      kStandardSurfaceSizes.end()) {
    log_warning("surface sample size " + std::to_string(count) +
                " is outside the standard set {2048, 4096, 8192}");
  }
  SurfaceSampler sampler(mesh, seed);
  PointCloud cloud;
  cloud.seed = seed;
  cloud.source = mesh.provenance();
  cloud.points.reserve(count);
  for (std::size_t n = 0; n < count; ++n) cloud.points.push_back(sampler.next());
  return cloud;
}

PointCloud fps_downsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (count > n) throw InvalidArgument("cannot downsample " + std::to_string(n) + " points to " + std::to_string(count));
  PointCloud out;
  out.seed = seed;
  out.source = cloud.source;
  if (count == 0) return out;
  out.points.reserve(count);

  Rng rng(seed);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  auto current = static_cast<std::size_t>(rng.below(n));
  for (std::size_t k = 0; k < count; ++k) {
    taken[current] = 1;
    const Vec3 p = cloud.points[current];
    out.points.push_back(p);
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (cloud.points[i] - p).squaredNorm();
      if (d < nearest[i]) nearest[i] = d;
      if (!taken[i] && nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    current = best;
  }
  return out;
}

PointCloud random_downsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  if (count > n) throw InvalidArgument("cannot downsample " + std::to_string(n) + " points to " + std::to_string(count));
  // Partial Fisher-Yates over indices.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  PointCloud out;
  out.seed = seed;
  out.source = cloud.source;
  out.points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(n - k));
    std::swap(idx[k], idx[j]);
    out.points.push_back(cloud.points[idx[k]]);
  }
  return out;
}

bool query_inside(const ScalarGrid& signed_grid, const Vec3& q, double iso) {
  return sample_trilinear(signed_grid, q) < iso;
}

QuerySet sample_queries(const ScalarGrid& signed_grid, const PointCloud& surface,
                        const SamplingSpec& spec, double iso) {
  if (spec.near_queries > 0 && surface.points.empty()) {
    throw InvalidArgument("near-surface queries need a non-empty surface cloud");
  }
  QuerySet out;
  out.sigma = spec.near_sigma;
  const std::size_t total = spec.uniform_queries + spec.near_queries;
  out.near_fraction = total ? static_cast<double>(spec.near_queries) / total : 0.0;
  out.queries.reserve(total);

  Rng uniform_rng(derive_seed(spec.seed, "queries/uniform"));
  for (std::size_t n = 0; n < spec.uniform_queries; ++n) {
    const double x = uniform_rng.uniform(-1.0, 1.0);
    const double y = uniform_rng.uniform(-1.0, 1.0);
    const double z = uniform_rng.uniform(-1.0, 1.0);
    out.queries.push_back(to_float_precision({x, y, z}));
    out.near_flags.push_back(0);
  }
  Rng near_rng(derive_seed(spec.seed, "queries/near"));
  for (std::size_t n = 0; n < spec.near_queries; ++n) {
    const Vec3& base = surface.points[static_cast<std::size_t>(near_rng.below(surface.size()))];
    Vec3 q;
    for (int a = 0; a < 3; ++a) q[a] = std::clamp(base[a] + spec.near_sigma * near_rng.normal(), -1.0, 1.0);
    out.queries.push_back(to_float_precision(q));
    out.near_flags.push_back(1);
  }
  out.labels.reserve(total);
  for (const Vec3& q : out.queries) out.labels.push_back(query_inside(signed_grid, q, iso) ? 1 : 0);
  return out;
}

// Akenine-Moller triangle/box overlap via the separating axis theorem.
bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c, const Aabb& box) {
  const Vec3 center = box.center();
  const Vec3 half = 0.5 * box.extent();
  const Vec3 v[3] = {a - center, b - center, c - center};
  const Vec3 e[3] = {v[1] - v[0], v[2] - v[1], v[0] - v[2]};

  for (int axis = 0; axis < 3; ++axis) {
    const double lo = std::min({v[0][axis], v[1][axis], v[2][axis]});
    const double hi = std::max({v[0][axis], v[1][axis], v[2][axis]});
    if (lo > half[axis] || hi < -half[axis]) return false;
  }
  for (const Vec3& edge : e) {
    for (int axis = 0; axis < 3; ++axis) {
      Vec3 unit = Vec3::Zero();
      unit[axis] = 1.0;
      const Vec3 l = unit.cross(edge);
      const double p0 = l.dot(v[0]);
      const double p1 = l.dot(v[1]);
      const double p2 = l.dot(v[2]);
      const double r = half.x() * std::abs(l.x()) + half.y() * std::abs(l.y()) + half.z() * std::abs(l.z());
      if (std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r) return false;
    }
  }
  const Vec3 normal = e[0].cross(e[1]);
  const double d = normal.dot(v[0]);
  const double r = half.x() * std::abs(normal.x()) + half.y() * std::abs(normal.y()) + half.z() * std::abs(normal.z());
  return std::abs(d) <= r;
}

ConditionPayload voxelize16(const TriangleMesh& mesh, const LabelGrid* labels) {
  constexpr int n = static_cast<int>(kVoxelConditionRes);
  constexpr double cell = 2.0 / n;
  ConditionPayload out;
  out.kind = PayloadKind::voxel16;
  out.voxels.assign(static_cast<std::size_t>(n) * n * n, 0);
  auto cell_index = [](int i, int j, int k) { return static_cast<std::size_t>(i + n * (j + n * k)); };
  auto cell_box = [&](int i, int j, int k) {
    Aabb b;
    b.lo = Vec3(-1.0 + i * cell, -1.0 + j * cell, -1.0 + k * cell);
    b.hi = b.lo + Vec3::Constant(cell);
    return b;
  };
  auto cell_range = [&](double lo, double hi, int& first, int& last) {
    first = std::clamp(static_cast<int>(std::floor((lo + 1.0) / cell)), 0, n - 1);
    last = std::clamp(static_cast<int>(std::floor((hi + 1.0) / cell)), 0, n - 1);
  };

  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto [a, b, c] = mesh.corners(t);
    Aabb tb;
    tb.grow(a);
    tb.grow(b);
    tb.grow(c);
    int lo[3], hi[3];
    for (int ax = 0; ax < 3; ++ax) cell_range(tb.lo[ax], tb.hi[ax], lo[ax], hi[ax]);
    for (int k = lo[2]; k <= hi[2]; ++k) {
      for (int j = lo[1]; j <= hi[1]; ++j) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
          std::uint8_t& slot = out.voxels[cell_index(i, j, k)];
          if (!slot && triangle_box_overlap(a, b, c, cell_box(i, j, k))) slot = 1;
        }
      }
    }
  }

  if (labels) {
    // Conservative downsampling: any inside label point within a closed cell
    // marks that cell.
    const GridShape& shape = labels->shape;
    const int r = shape.resolution;
    for (int k = 0; k < r; ++k) {
      for (int j = 0; j < r; ++j) {
        for (int i = 0; i < r; ++i) {
          if (!labels->inside(shape.index(i, j, k))) continue;
          const Vec3 p = shape.point(i, j, k);
          int lo[3], hi[3];
          for (int ax = 0; ax < 3; ++ax) {
            const double u = (p[ax] + 1.0) / cell;
            const double f = std::floor(u);
            hi[ax] = std::clamp(static_cast<int>(f), 0, n - 1);
            lo[ax] = (u == f) ? std::clamp(static_cast<int>(f) - 1, 0, n - 1) : hi[ax];
          }
          for (int z = lo[2]; z <= hi[2]; ++z) {
            for (int y = lo[1]; y <= hi[1]; ++y) {
              for (int x = lo[0]; x <= hi[0]; ++x) out.voxels[cell_index(x, y, z)] = 1;
            }
          }
        }
      }
    }
  }
  return out;
}

std::vector<Vec3> box_corners(const Aabb& box) {
  std::vector<Vec3> corners;
  corners.reserve(8);
  for (int c = 0; c < 8; ++c) {
    corners.emplace_back(c & 1 ? box.hi.x() : box.lo.x(), c & 2 ? box.hi.y() : box.lo.y(),
                         c & 4 ? box.hi.z() : box.lo.z());
  }
  return corners;
}

ConditionPayload bbox_corners(const TriangleMesh& mesh) {
  if (mesh.empty()) throw InvalidArgument("cannot bound an empty mesh");
  ConditionPayload out;
  out.kind = PayloadKind::bbox8;
  out.corners = box_corners(mesh.bounds());
  return out;
}

ConditionPayload sparse_cloud(const TriangleMesh& mesh, std::uint64_t seed) {
  ConditionPayload out;
  out.kind = PayloadKind::sparse512;
  SurfaceSampler sampler(mesh, seed);
  out.points.reserve(kSparseConditionPoints);
  for (std::size_t n = 0; n < kSparseConditionPoints; ++n) out.points.push_back(sampler.next());
  return out;
}

namespace {

// Sutherland-Hodgman clip of a convex polygon against one axis-aligned half-space.
std::vector<Vec3> clip(const std::vector<Vec3>& poly, int axis, double bound, bool keep_below) {
  std::vector<Vec3> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& cur = poly[i];
    const Vec3& nxt = poly[(i + 1) % n];
    const double dc = keep_below ? bound - cur[axis] : cur[axis] - bound;
    const double dn = keep_below ? bound - nxt[axis] : nxt[axis] - bound;
    if (dc >= 0.0) out.push_back(cur);
    if ((dc >= 0.0) != (dn >= 0.0)) {
      const double t = dc / (dc - dn);
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec3>& poly) {
  if (poly.size() < 3) return 0.0;
  Vec3 acc = Vec3::Zero();
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) acc += (poly[i] - poly[0]).cross(poly[i + 1] - poly[0]);
  return 0.5 * acc.norm();
}

}  // namespace

double surface_area_in_box(const TriangleMesh& mesh, const Aabb& box) {
  double area = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto [a, b, c] = mesh.corners(t);
    std::vector<Vec3> poly{a, b, c};
    for (int axis = 0; axis < 3 && !poly.empty(); ++axis) {
      poly = clip(poly, axis, box.lo[axis], false);
      if (!poly.empty()) poly = clip(poly, axis, box.hi[axis], true);
    }
    area += polygon_area(poly);
  }
  return area;
}

ConditionPayload make_partial(const TriangleMesh& mesh, const Aabb& box, std::uint64_t seed) {
  const double total = mesh.surface_area();
  if (!(total > 0.0)) throw InvalidArgument("cannot sample a zero-area mesh");
  const double inside = surface_area_in_box(mesh, box);
  if (inside >= 0.95 * total) {
    throw InvalidArgument("extension box covers 95% or more of the surface area");
  }
  ConditionPayload out;
  out.kind = PayloadKind::partial2056;
  SurfaceSampler sampler(mesh, seed);
  out.points.reserve(kPartialConditionPoints);
  while (out.points.size() < kPartialConditionPoints) {
    const Vec3 p = sampler.next();
    if (!box.contains(p)) out.points.push_back(p);
  }
  out.corners = box_corners(box);
  return out;
}

Aabb random_extension_box(const Aabb& bounds, std::uint64_t seed) {
  Rng rng(seed);
  const double fraction = rng.uniform(0.10, 0.40);
  // Side fractions multiply to `fraction` and each stays within [fraction, 1].
  const double sx = std::pow(fraction, rng.uniform());
  const double sy = std::pow(fraction / sx, rng.uniform());
  const double sz = fraction / (sx * sy);
  const Vec3 side(sx, sy, sz);
  const Vec3 ext = bounds.extent();
  Aabb box;
  for (int a = 0; a < 3; ++a) {
    const double len = side[a] * ext[a];
    box.lo[a] = bounds.lo[a] + rng.uniform() * (ext[a] - len);
    box.hi[a] = box.lo[a] + len;
  }
  return box;
}

}  // namespace geoforge
