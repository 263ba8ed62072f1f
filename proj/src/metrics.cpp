#include "geoforge/metrics.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace geoforge {
namespace {

// Uniform hash grid for exact nearest-neighbor queries.
class PointGrid {
 public:
  explicit PointGrid(const std::vector<Vec3>& pts) : pts_(pts) {
    for (const Vec3& p : pts) box_.grow(p);
    const Vec3 ext = box_.extent().cwiseMax(1e-12);
    // about two points per cell
    const double per = std::cbrt(ext.prod() / std::max<double>(1.0, pts.size() / 2.0));
    cell_ = std::max(per, ext.maxCoeff() / 256.0);
    for (int a = 0; a < 3; ++a) dims_[a] = std::max(1, static_cast<int>(std::ceil(ext[a] / cell_)));
    start_.assign(cells() + 1, 0);
    std::vector<std::size_t> key(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      key[i] = flat(cell_of(pts[i]));
      ++start_[key[i] + 1];
    }
    for (std::size_t c = 0; c < cells(); ++c) start_[c + 1] += start_[c];
    order_.resize(pts.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) order_[fill[key[i]]++] = static_cast<std::uint32_t>(i);
  }

  double nearest_squared(const Vec3& q) const {
    const std::array<int, 3> c = cell_of(q);
    double best = std::numeric_limits<double>::infinity();
    const int max_ring = std::max({dims_[0], dims_[1], dims_[2]});
    for (int r = 0; r <= max_ring; ++r) {
      scan_ring(c, r, q, best);
      const double reach = r * cell_;
      if (best <= reach * reach) break;
    }
    return best;
  }

 private:
  std::size_t cells() const {
    return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  }
  std::array<int, 3> cell_of(const Vec3& p) const {
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      const int v = static_cast<int>(std::floor((p[a] - box_.lo[a]) / cell_));
      c[a] = std::clamp(v, 0, dims_[a] - 1);
    }
    return c;
  }
  std::size_t flat(const std::array<int, 3>& c) const {
    return static_cast<std::size_t>(c[0]) + static_cast<std::size_t>(dims_[0]) * (c[1] + static_cast<std::size_t>(dims_[1]) * c[2]);
  }
  void scan_cell(const std::array<int, 3>& c, const Vec3& q, double& best) const {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < 0 || c[a] >= dims_[a]) return;
    }
    const std::size_t f = flat(c);
    for (std::size_t s = start_[f]; s < start_[f + 1]; ++s) {
      best = std::min(best, (pts_[order_[s]] - q).squaredNorm());
    }
  }
  // Cells at Chebyshev distance exactly r from c.
  void scan_ring(const std::array<int, 3>& c, int r, const Vec3& q, double& best) const {
    for (int dz = -r; dz <= r; ++dz) {
      for (int dy = -r; dy <= r; ++dy) {
        const bool face = std::abs(dz) == r || std::abs(dy) == r;
        const int step = face ? 1 : 2 * r;
        for (int dx = -r; dx <= r; dx += std::max(step, 1)) {
          scan_cell({c[0] + dx, c[1] + dy, c[2] + dz}, q, best);
        }
      }
    }
  }

  const std::vector<Vec3>& pts_;
  Aabb box_;
  double cell_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> order_;
};

void require_points(const PointCloud& c, const char* what) {
  if (c.points.empty()) throw InvalidArgument(std::string("empty point cloud: ") + what);
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double fraction_within(const std::vector<double>& d2, double d) {
  std::size_t n = 0;
  for (double x : d2) n += std::sqrt(x) <= d ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(d2.size());
}

// Hungarian method with potentials on a dense square cost matrix.
double min_cost_assignment(const std::vector<double>& cost, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      const double* row = &cost[(i0 - 1) * n];
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  // sum the matched costs directly rather than trusting the potentials
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
  return total;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

VoxelGrid::VoxelGrid(int res, std::vector<std::uint8_t> occupancy) : resolution(res), cells(std::move(occupancy)) {
  const auto r = static_cast<std::size_t>(res);
  if (res <= 0 || cells.size() != r * r * r) throw InvalidArgument("voxel grid size does not match its resolution");
}

std::vector<double> nearest_squared_distances(const std::vector<Vec3>& queries, const std::vector<Vec3>& cloud) {
  std::vector<double> out(queries.size());
  if (queries.empty()) return out;
  if (cloud.empty()) throw InvalidArgument("nearest neighbor query against an empty cloud");
  const PointGrid grid(cloud);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, queries.size(), 256),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t i = r.begin(); i < r.end(); ++i) out[i] = grid.nearest_squared(queries[i]);
                    });
  return out;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  require_points(a, "chamfer");
  require_points(b, "chamfer");
  return mean(nearest_squared_distances(a.points, b.points)) + mean(nearest_squared_distances(b.points, a.points));
}

double f_score(const PointCloud& a, const PointCloud& b, double d) {
  if (!(d > 0.0)) throw InvalidArgument("f-score threshold must be positive");
  require_points(a, "f-score");
  require_points(b, "f-score");
  const double precision = fraction_within(nearest_squared_distances(a.points, b.points), d);
  const double recall = fraction_within(nearest_squared_distances(b.points, a.points), d);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double emd_exact(const PointCloud& a, const PointCloud& b) {
  const std::size_t n = a.size();
  if (n != b.size()) throw InvalidArgument("EMD needs equal-size clouds");
  if (n > kMaxEmdPoints) throw InvalidArgument("EMD is limited to " + std::to_string(kMaxEmdPoints) + " points");
  if (n == 0) throw InvalidArgument("empty point cloud: emd");
  std::vector<double> cost(n * n);
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i = r.begin(); i < r.end(); ++i) {
      for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = (a.points[i] - b.points[j]).norm();
    }
  });
  return min_cost_assignment(cost, n) / static_cast<double>(n);
}

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.resolution != b.resolution || a.cells.size() != b.cells.size()) {
    throw InvalidArgument("voxel grids differ in resolution");
  }
  std::size_t both = 0, either = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const bool x = a.cells[i] != 0, y = b.cells[i] != 0;
    both += x && y;
    either += x || y;
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

double reference_volume(const TriangleMesh& input, const RemeshResult& result) {
  if (is_watertight(input).watertight) return std::abs(mesh_volume(result.normalized_input));
  const double h = result.label_grid.shape.spacing();
  return static_cast<double>(result.label_grid.inside_count()) * h * h * h;
}

double volume_conservation(const TriangleMesh& input, const RemeshResult& result) {
  if (!is_watertight(result.mesh).watertight) throw InvalidArgument("remesh result is not watertight");
  const double out = mesh_volume(result.mesh);
  const double reference = reference_volume(input, result);
  if (!(reference > 0.0)) throw InvalidArgument("zero reference volume");
  return out / reference;
}

std::string MetricReport::to_kv() const {
  std::ostringstream os;
  os << "cd=" << fmt(cd) << '\n';
  os << "emd=" << (emd ? fmt(*emd) : std::string("none")) << '\n';
  os << "voxel_iou=" << fmt(voxel_iou) << '\n';
  os << "f_score=" << fmt(f_score) << '\n';
  os << "volume_ratio=" << (volume_ratio ? fmt(*volume_ratio) : std::string("none")) << '\n';
  os << "fscore_threshold=" << fmt(params.fscore_threshold) << '\n';
  os << "cd_points=" << params.cd_points << '\n';
  os << "emd_points=" << params.emd_points << '\n';
  os << "voxel_resolution=" << params.voxel_resolution << '\n';
  return os.str();
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["cd"] = cd;
  j["emd"] = emd ? nlohmann::json(*emd) : nlohmann::json(nullptr);
  j["voxel_iou"] = voxel_iou;
  j["f_score"] = f_score;
  j["volume_ratio"] = volume_ratio ? nlohmann::json(*volume_ratio) : nlohmann::json(nullptr);
  j["params"] = {{"fscore_threshold", params.fscore_threshold},
                 {"cd_points", params.cd_points},
                 {"emd_points", params.emd_points},
                 {"voxel_resolution", params.voxel_resolution}};
  return j;
}

}  // namespace geoforge
