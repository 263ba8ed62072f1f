// Model-facing payloads: surface point clouds, quarter-scale downsamples,
// labeled occupancy queries and conditioning payloads.

#pragma once

#include "geoforge/grid.hpp"
#include "geoforge/mesh.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace geoforge {

struct PointCloud {
  std::vector<Vec3> points;
  std::uint64_t seed = 0;
  std::string source;

  std::size_t size() const { return points.size(); }
};

struct QuerySet {
  std::vector<Vec3> queries;  // uniform block first, then the near-surface block
  std::vector<std::uint8_t> labels;      // 1 = inside
  std::vector<std::uint8_t> near_flags;  // 1 = near-surface query
  double near_fraction = 0.0;
  double sigma = 0.0;
};

struct SamplingSpec {
  std::vector<std::size_t> surface_sizes{2048, 4096, 8192};
  std::size_t downsample_ratio = 4;
  std::size_t uniform_queries = 8192;
  std::size_t near_queries = 8192;
  double near_sigma = 0.01;
  /// Farthest-point downsampling; random subsampling when false.
  bool farthest_point = true;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr std::array<std::size_t, 3> kStandardSurfaceSizes{2048, 4096, 8192};
inline constexpr std::size_t kVoxelConditionRes = 16;
inline constexpr std::size_t kSparseConditionPoints = 512;
inline constexpr std::size_t kPartialConditionPoints = 2048;
inline constexpr std::size_t kBoxCorners = 8;

enum class PayloadKind : std::uint8_t { voxel16 = 0, bbox8 = 1, sparse512 = 2, partial2056 = 3 };

struct ConditionPayload {
  PayloadKind kind = PayloadKind::voxel16;
  std::vector<std::uint8_t> voxels;  // voxel16: 16^3 occupancy, x fastest
  std::vector<Vec3> points;          // sparse512 / partial (surface part)
  std::vector<Vec3> corners;         // bbox8 / partial (extension box)

  /// Number of positions (or cells) a consumer receives.
  std::size_t length() const;
};

/// Area-uniform surface sample: alias-table triangle choice, uniform
/// barycentric position. Sizes outside {2048, 4096, 8192} are accepted with a
/// logged warning.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t count, std::uint64_t seed);

/// Farthest-point sampling from a seeded start; ties go to the lower index.
PointCloud fps_downsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed);
PointCloud random_downsample(const PointCloud& cloud, std::size_t count, std::uint64_t seed);

/// Uniform queries in [-1, 1]^3 plus near-surface queries (surface point plus
/// Gaussian jitter, clamped to the cube), labeled inside iff the trilinear
/// signed value is below `iso`. Query positions are rounded to float.
QuerySet sample_queries(const ScalarGrid& signed_grid, const PointCloud& surface,
                        const SamplingSpec& spec, double iso = 0.0);

/// Inside test used for query labels.
bool query_inside(const ScalarGrid& signed_grid, const Vec3& q, double iso);

/// 16^3 occupancy: a cell is occupied iff a triangle intersects it or any
/// label-grid point inside the cell is inside.
ConditionPayload voxelize16(const TriangleMesh& mesh, const LabelGrid* labels = nullptr);

/// Corners of the tight bounding box, x fastest: ---, +--, -+-, ++-, --+, +-+, -++, +++.
ConditionPayload bbox_corners(const TriangleMesh& mesh);
std::vector<Vec3> box_corners(const Aabb& box);

ConditionPayload sparse_cloud(const TriangleMesh& mesh, std::uint64_t seed);

/// 2048 surface points outside `box` followed by the box's 8 corners. Throws
/// when the box holds 95% or more of the surface area.
ConditionPayload make_partial(const TriangleMesh& mesh, const Aabb& box, std::uint64_t seed);

/// Seeded axis-aligned box covering 10-40% of the bounding box volume.
Aabb random_extension_box(const Aabb& bounds, std::uint64_t seed);

/// Area of the mesh surface clipped to a closed box.
double surface_area_in_box(const TriangleMesh& mesh, const Aabb& box);

/// Separating-axis triangle/box overlap test.
bool triangle_box_overlap(const Vec3& a, const Vec3& b, const Vec3& c, const Aabb& box);

}  // namespace geoforge
