#include "geoforge/watertight.hpp"

#include "geoforge/marching_cubes.hpp"

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include <chrono>
#include <cmath>
#include <deque>
#include <numbers>

namespace geoforge {

std::string to_string(LabelingMode mode) {
  return mode == LabelingMode::ray_visibility ? "ray" : "flood";
}

LabelingMode labeling_mode_from_string(const std::string& name) {
  if (name == "ray" || name == "ray_visibility") return LabelingMode::ray_visibility;
  if (name == "flood" || name == "exterior_flood_fill") return LabelingMode::exterior_flood_fill;
  throw InvalidArgument("unknown labeling mode '" + name + "' (expected ray or flood)");
}

void RemeshConfig::validate() const {
  if (grid_res < 8) throw InvalidArgument("grid resolution must be at least 8");
  if (grid_res > 1024) throw InvalidArgument("grid resolution above 1024 is not supported");
  if (directions < 6) throw InvalidArgument("at least 6 probe directions are required");
  if (!(escape_threshold >= 0.0 && escape_threshold < 1.0)) {
    throw InvalidArgument("escape threshold must lie in [0, 1)");
  }
  if (!(iso_level >= 0.0)) throw InvalidArgument("iso level must be nonnegative");
  if (shell_epsilon && !(*shell_epsilon > 0.0)) throw InvalidArgument("shell epsilon must be positive");
  if (!(flood_open_threshold >= 0.0)) throw InvalidArgument("flood threshold must be nonnegative");
  if (!(margin >= 0.0 && margin < 0.5)) throw InvalidArgument("margin must lie in [0, 0.5)");
  if (!(ray_t_min >= 0.0)) throw InvalidArgument("ray t_min must be nonnegative");
}

std::vector<Vec3> fibonacci_directions(int count) {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(std::max(count, 0)));
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    dirs.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
    dirs.back().normalize();
  }
  return dirs;
}

ScalarGrid compute_udf_grid(const TriangleBvh& bvh, int resolution, const Deadline* deadline) {
  ScalarGrid grid(resolution, GridKind::udf);
  const GridShape shape = grid.shape;
  tbb::parallel_for(tbb::blocked_range<int>(0, resolution), [&](const tbb::blocked_range<int>& slab) {
    for (int k = slab.begin(); k < slab.end(); ++k) {
      check_deadline(deadline);
      for (int j = 0; j < resolution; ++j) {
        // Each row restarts its hint so results never depend on scheduling.
        TriangleBvh::Hint hint;
        for (int i = 0; i < resolution; ++i) {
          grid.values[shape.index(i, j, k)] = bvh.closest_point(shape.point(i, j, k), hint).distance;
        }
      }
    }
  });
  return grid;
}

LabelGrid compute_visibility_labels(const TriangleBvh& bvh, int resolution, int directions,
                                    double escape_threshold, double t_min, const Deadline* deadline) {
  if (directions < 1) throw InvalidArgument("need at least one probe direction");
  if (!(escape_threshold >= 0.0 && escape_threshold < 1.0)) {
    throw InvalidArgument("escape threshold must lie in [0, 1)");
  }
  LabelGrid labels(resolution);
  const GridShape shape = labels.shape;
  const std::vector<Vec3> dirs = fibonacci_directions(directions);
  // outside <=> escapes / D > tau <=> escapes >= need
  const int need = static_cast<int>(std::floor(escape_threshold * directions)) + 1;

  tbb::parallel_for(tbb::blocked_range<int>(0, resolution), [&](const tbb::blocked_range<int>& slab) {
    // Hints only steer the search for a blocker; labels never depend on them.
    std::vector<TriangleBvh::Hint> hints(dirs.size());
    std::vector<TriangleBvh::Hint> row_start(dirs.size());
    for (int k = slab.begin(); k < slab.end(); ++k) {
      check_deadline(deadline);
      for (int j = 0; j < resolution; ++j) {
        hints = row_start;
        int first = 0;  // probe that escaped for the previous point
        for (int i = 0; i < resolution; ++i) {
          const Vec3 p = shape.point(i, j, k);
          int escapes = 0;
          int tried = 0;
          // Probe order only affects speed; the count test is order free.
          for (int n = 0; n < directions; ++n) {
            const int d = (first + n) % directions;
            ++tried;
            if (bvh.any_ray_escape(p, dirs[d], t_min, hints[d])) {
              if (escapes == 0) first = d;
              ++escapes;
            }
            if (escapes >= need) break;
            if (escapes + (directions - tried) < need) break;
          }
          labels.labels[shape.index(i, j, k)] = escapes >= need ? Label::outside : Label::inside;
          if (i == 0) row_start = hints;
        }
      }
    }
  });
  return labels;
}

LabelGrid exterior_flood_fill(const ScalarGrid& udf, double open_threshold) {
  const int r = udf.resolution();
  const GridShape shape = udf.shape;
  const double limit = open_threshold * udf.spacing();
  LabelGrid labels(r, Label::inside);
  std::vector<std::size_t> queue;
  auto open = [&](std::size_t idx) { return udf.values[idx] > limit; };

  for (int k = 0; k < r; ++k) {
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) {
        if (!shape.on_boundary(i, j, k)) continue;
        const std::size_t idx = shape.index(i, j, k);
        if (open(idx)) {
          labels.labels[idx] = Label::outside;
          queue.push_back(idx);
        }
      }
    }
  }
  const std::size_t rr = static_cast<std::size_t>(r);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t idx = queue[head];
    const std::size_t i = idx % rr;
    const std::size_t j = (idx / rr) % rr;
    const std::size_t k = idx / (rr * rr);
    const std::size_t nbr[6] = {
        i > 0 ? idx - 1 : idx,           i + 1 < rr ? idx + 1 : idx,
        j > 0 ? idx - rr : idx,          j + 1 < rr ? idx + rr : idx,
        k > 0 ? idx - rr * rr : idx,     k + 1 < rr ? idx + rr * rr : idx,
    };
    for (std::size_t n : nbr) {
      if (labels.labels[n] == Label::inside && open(n)) {
        labels.labels[n] = Label::outside;
        queue.push_back(n);
      }
    }
  }
  return labels;
}

ScalarGrid synthesize_signed_grid(const ScalarGrid& udf, const LabelGrid& labels,
                                  std::optional<double> shell_epsilon) {
  if (!(udf.shape == labels.shape)) throw InvalidArgument("resolution mismatch between UDF and labels");
  ScalarGrid out(udf.resolution(), GridKind::signed_field);
  const double shell = shell_epsilon ? *shell_epsilon * udf.spacing() : 0.0;
  for (std::size_t n = 0; n < udf.values.size(); ++n) {
    const double d = udf.values[n];
    if (labels.inside(n)) {
      out.values[n] = -d;
    } else {
      out.values[n] = shell_epsilon ? d - shell : d;
    }
  }
  return out;
}

double effective_margin(const RemeshConfig& config) {
  const double h = 2.0 / (config.grid_res - 1);
  const double band = std::max(1.0, config.shell_epsilon.value_or(0.0)) + config.iso_level + 1.0;
  return std::max(config.margin, band * h);
}

SignedField compute_signed_field(const TriangleMesh& mesh, const RemeshConfig& config,
                                 const Deadline* deadline) {
  config.validate();
  if (mesh.empty()) throw InvalidArgument("cannot remesh an empty mesh");
  SignedField field;
  field.margin = effective_margin(config);
  auto [normalized, xf] = normalize_mesh(mesh, field.margin);
  field.transform = xf;

  const int r = config.grid_res;
  const Aabb box = normalized.bounds();
  const double reach = std::max(box.lo.cwiseAbs().maxCoeff(), box.hi.cwiseAbs().maxCoeff());
  if (reach > 1.0 - field.margin + 1e-9) {
    throw GeoError("normalized geometry is not inset from the grid boundary");
  }

  const TriangleBvh bvh(normalized, config.leaf_size);
  check_deadline(deadline);
  field.udf = compute_udf_grid(bvh, r, deadline);
  check_deadline(deadline);
  field.labels = config.labeling == LabelingMode::ray_visibility
                     ? compute_visibility_labels(bvh, r, config.directions, config.escape_threshold,
                                                 config.ray_t_min, deadline)
                     : exterior_flood_fill(field.udf, config.flood_open_threshold);
  // The outermost layer is exterior by construction of the margin.
  const GridShape shape = field.labels.shape;
  for (int k = 0; k < r; ++k) {
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) {
        if (shape.on_boundary(i, j, k)) field.labels.labels[shape.index(i, j, k)] = Label::outside;
      }
    }
  }
  check_deadline(deadline);
  field.signed_grid = synthesize_signed_grid(field.udf, field.labels, config.shell_epsilon);
  field.normalized_input = std::move(normalized);
  return field;
}

RemeshResult remesh_watertight(const TriangleMesh& mesh, const RemeshConfig& config,
                               const Deadline* deadline) {
  const auto start = std::chrono::steady_clock::now();
  SignedField field = compute_signed_field(mesh, config, deadline);
  const double h = field.signed_grid.spacing();

  RemeshResult result;
  result.stats.input_boundary_edges = is_watertight(mesh).boundary_edges;
  TriangleMesh surface = marching_cubes(field.signed_grid, config.iso_level * h);
  if (surface.empty()) throw GeoError("empty output: the signed field never changes sign");
  const WatertightReport check = is_watertight(surface);
  if (!check.watertight) throw GeoError("marching cubes produced a non-watertight surface");

  result.stats.inside_fraction =
      static_cast<double>(field.labels.inside_count()) / static_cast<double>(field.labels.labels.size());
  result.stats.output_volume = mesh_volume(surface);
  if (!(result.stats.output_volume > 0.0)) throw GeoError("empty output: nonpositive enclosed volume");
  result.mesh = TriangleMesh(surface.vertices(), surface.triangles(), mesh.provenance());
  result.signed_grid = std::move(field.signed_grid);
  result.label_grid = std::move(field.labels);
  result.transform = field.transform;
  result.normalized_input = std::move(field.normalized_input);
  result.margin = field.margin;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace geoforge
