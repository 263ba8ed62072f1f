// Watertight remeshing: unsigned distance grid, visibility labeling, signed
// field synthesis and isosurface extraction.

#pragma once

#include "geoforge/budget.hpp"
#include "geoforge/bvh.hpp"
#include "geoforge/grid.hpp"
#include "geoforge/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace geoforge {

enum class LabelingMode { ray_visibility, exterior_flood_fill };

std::string to_string(LabelingMode mode);
LabelingMode labeling_mode_from_string(const std::string& name);

struct RemeshConfig {
  int grid_res = 256;
  int directions = 64;
  /// A grid point is outside iff its escaping-probe fraction exceeds this.
  double escape_threshold = 0.0;
  /// Extraction level in voxel units on the inside-negative field.
  double iso_level = 0.0;
  /// Thin-sheet thickness in voxel units; disabled when empty.
  std::optional<double> shell_epsilon;
  LabelingMode labeling = LabelingMode::ray_visibility;
  /// Flood fill passes only through points with udf > threshold * h.
  double flood_open_threshold = 1.0;
  double margin = kDefaultMargin;
  double ray_t_min = kDefaultRayTMin;
  std::size_t leaf_size = 4;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct RemeshStats {
  std::size_t input_boundary_edges = 0;
  double inside_fraction = 0.0;
  double output_volume = 0.0;
  double wall_seconds = 0.0;
};

struct RemeshResult {
  TriangleMesh mesh;  // watertight, in the normalized frame
  ScalarGrid signed_grid;
  LabelGrid label_grid;
  /// Input (original frame) -> normalized frame shared by mesh and grids.
  NormalizationTransform transform;
  TriangleMesh normalized_input;
  double margin = 0.0;  // margin actually used for normalization
  RemeshStats stats;
};

/// D deterministic unit directions on a Fibonacci sphere.
std::vector<Vec3> fibonacci_directions(int count);

/// Exact unsigned distance at every grid point.
ScalarGrid compute_udf_grid(const TriangleBvh& bvh, int resolution, const Deadline* deadline = nullptr);

/// Casts `directions` probes from every grid point; a point is outside iff the
/// fraction of probes that escape exceeds `escape_threshold`.
LabelGrid compute_visibility_labels(const TriangleBvh& bvh, int resolution, int directions,
                                    double escape_threshold, double t_min = kDefaultRayTMin,
                                    const Deadline* deadline = nullptr);

/// 6-connected flood from the domain boundary through points whose udf
/// exceeds open_threshold * h. Reached points are outside.
LabelGrid exterior_flood_fill(const ScalarGrid& udf, double open_threshold);

/// -udf at inside points and +udf at outside points. With a shell, outside
/// values become udf - shell * h so that every point within shell * h of the
/// surface is nonpositive and open sheets gain a 2 * shell voxel thickness.
ScalarGrid synthesize_signed_grid(const ScalarGrid& udf, const LabelGrid& labels,
                                  std::optional<double> shell_epsilon = std::nullopt);

struct SignedField {
  TriangleMesh normalized_input;
  NormalizationTransform transform;
  double margin = 0.0;
  ScalarGrid udf;
  LabelGrid labels;  // outermost layer forced outside
  ScalarGrid signed_grid;
};

/// normalize -> BVH -> UDF -> labels -> signed field.
SignedField compute_signed_field(const TriangleMesh& mesh, const RemeshConfig& config,
                                 const Deadline* deadline = nullptr);

/// compute_signed_field followed by marching cubes at iso_level * h.
RemeshResult remesh_watertight(const TriangleMesh& mesh, const RemeshConfig& config,
                               const Deadline* deadline = nullptr);

/// Margin used by remesh_watertight for a configuration: the configured one,
/// widened when needed so the outermost grid layer stays clear of the surface.
double effective_margin(const RemeshConfig& config);

}  // namespace geoforge
