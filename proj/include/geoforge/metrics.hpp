// Geometry evaluation: Chamfer distance, exact EMD, voxel IoU, F-score and
// volume conservation.

#pragma once

#include "geoforge/sampling.hpp"
#include "geoforge/watertight.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace geoforge {

inline constexpr double kDefaultFScoreThreshold = 0.02;
inline constexpr std::size_t kMaxEmdPoints = 1024;

struct VoxelGrid {
  int resolution = 0;
  std::vector<std::uint8_t> cells;  // nonzero = occupied, x fastest

  VoxelGrid() = default;
  VoxelGrid(int res, std::vector<std::uint8_t> occupancy);
};

/// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2.
double chamfer(const PointCloud& a, const PointCloud& b);
/// Minimum mean Euclidean matching cost between equal-size clouds.
double emd_exact(const PointCloud& a, const PointCloud& b);
/// |A and B| / |A or B|; 1 when both are empty.
double voxel_iou(const VoxelGrid& a, const VoxelGrid& b);
/// Harmonic mean of precision (A within d of B) and recall (B within d of A).
double f_score(const PointCloud& a, const PointCloud& b, double d = kDefaultFScoreThreshold);

/// vol(out) / vol(in) for a watertight input, else vol(out) over the label
/// grid's inside-point count times h^3. Volumes are taken in the normalized
/// frame.
double volume_conservation(const TriangleMesh& input, const RemeshResult& result);
/// The denominator used above; zero for an open sheet sealed only by the shell.
double reference_volume(const TriangleMesh& input, const RemeshResult& result);

/// Squared distance from every query to its nearest point in `cloud`.
std::vector<double> nearest_squared_distances(const std::vector<Vec3>& queries,
                                              const std::vector<Vec3>& cloud);

struct MetricParams {
  double fscore_threshold = kDefaultFScoreThreshold;
  std::size_t cd_points = 0;
  std::size_t emd_points = 0;  // 0 when EMD was not computed
  int voxel_resolution = 0;
};

struct MetricReport {
  double cd = 0.0;
  std::optional<double> emd;
  double voxel_iou = 0.0;
  double f_score = 0.0;
  std::optional<double> volume_ratio;  // unset when the input encloses nothing
  MetricParams params;

  std::string to_kv() const;
  nlohmann::json to_json() const;
};

}  // namespace geoforge
