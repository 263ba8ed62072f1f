// geoforge {remesh|sample|voxelize|metrics|run|validate}

#include "geoforge/log.hpp"
#include "geoforge/mesh_io.hpp"
#include "geoforge/metrics.hpp"
#include "geoforge/occs.hpp"
#include "geoforge/pipeline.hpp"
#include "geoforge/random.hpp"
#include "geoforge/watertight.hpp"

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace fs = std::filesystem;
using namespace geoforge;

namespace {

// Flags shared by every subcommand that touches the grid.
struct GridFlags {
  int res = 256;
  int dirs = 64;
  double tau = 0.0;
  double iso = 0.0;
  double shell = 0.0;
  std::string labeling = "ray";
  double margin = kDefaultMargin;

  void add(CLI::App* app, int default_res) {
    res = default_res;
    app->add_option("--res", res, "grid resolution R (R^3 samples over [-1,1]^3)")->capture_default_str();
    app->add_option("--dirs", dirs, "probe directions per grid point")->capture_default_str();
    app->add_option("--tau", tau, "escape threshold: outside iff escaping fraction > tau")->capture_default_str();
    app->add_option("--iso", iso, "extraction level in voxels")->capture_default_str();
    app->add_option("--shell", shell, "thin-sheet thickness in voxels (0 disables)")->capture_default_str();
    app->add_option("--labeling", labeling, "inside/outside labeling")
        ->check(CLI::IsMember({"ray", "flood"}))
        ->capture_default_str();
    app->add_option("--margin", margin, "normalization margin")->capture_default_str();
  }

  RemeshConfig config() const {
    RemeshConfig c;
    c.grid_res = res;
    c.directions = dirs;
    c.escape_threshold = tau;
    c.iso_level = iso;
    if (shell > 0.0) c.shell_epsilon = shell;
    c.labeling = labeling_mode_from_string(labeling);
    c.margin = margin;
    return c;
  }
};

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw InvalidArgument("expected a comma-separated list of counts, got '" + text + "'");
    }
  }
  if (out.empty()) throw InvalidArgument("empty count list");
  return out;
}

void print_json(const nlohmann::json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write " + out);
    f << text;
  }
}

int cmd_remesh(const std::string& input, const std::string& out, const GridFlags& flags, bool normalized,
               const std::string& grid_out) {
  const TriangleMesh mesh = load_mesh(input);
  const RemeshResult r = remesh_watertight(mesh, flags.config());
  const TriangleMesh result = normalized ? r.mesh : transform_mesh(r.mesh, r.transform.inverted());
  save_mesh(out, result);
  if (!grid_out.empty()) save_grid(grid_out, r.signed_grid);
  const WatertightReport w = is_watertight(result);
  std::printf("remesh %s -> %s: watertight=%d triangles=%zu vertices=%zu volume=%.6g inside_fraction=%.4f "
              "input_boundary_edges=%zu seconds=%.2f\n",
              input.c_str(), out.c_str(), w.watertight ? 1 : 0, result.triangle_count(), result.vertex_count(),
              mesh_volume(result), r.stats.inside_fraction, r.stats.input_boundary_edges, r.stats.wall_seconds);
  return w.watertight ? 0 : 1;
}

int cmd_sample(const std::string& input, const std::string& out, const GridFlags& flags,
               const std::string& surface, const std::string& queries, double sigma, bool random_down,
               std::uint64_t seed) {
  const TriangleMesh mesh = load_mesh(input);
  const RemeshConfig config = flags.config();
  const SignedField field = compute_signed_field(mesh, config);
  const TriangleMesh& m = field.normalized_input;

  SamplingSpec spec;
  spec.surface_sizes = parse_sizes(surface);
  const auto q = parse_sizes(queries);
  if (q.size() != 2) throw InvalidArgument("--queries takes two counts: uniform,near");
  spec.uniform_queries = q[0];
  spec.near_queries = q[1];
  spec.near_sigma = sigma;
  spec.farthest_point = !random_down;
  spec.seed = seed;
  spec.validate();

  SampleContainer c;
  c.asset_hash = hash_string(fs::path(input).stem().string());
  for (std::size_t n : spec.surface_sizes) {
    const std::string tag = std::to_string(n);
    PointCloud s = sample_surface(m, n, derive_seed(seed, "surface/" + tag));
    const std::size_t k = n / spec.downsample_ratio;
    c.downsamples.push_back(spec.farthest_point ? fps_downsample(s, k, derive_seed(seed, "down/" + tag))
                                                : random_downsample(s, k, derive_seed(seed, "down/" + tag)));
    c.surfaces.push_back(std::move(s));
  }
  std::size_t densest = 0;
  for (std::size_t s = 1; s < c.surfaces.size(); ++s) {
    if (c.surfaces[s].size() > c.surfaces[densest].size()) densest = s;
  }
  const ScalarGrid stored = quantize_to_float(field.signed_grid);
  c.queries = sample_queries(stored, c.surfaces[densest], spec, config.iso_level * stored.spacing());
  c.payloads.push_back(voxelize16(m, &field.labels));
  c.payloads.push_back(bbox_corners(m));
  c.payloads.push_back(sparse_cloud(m, derive_seed(seed, "sparse")));
  save_occs(out, c);

  std::size_t inside = 0;
  for (std::uint8_t l : c.queries.labels) inside += l;
  std::printf("sample %s -> %s:", input.c_str(), out.c_str());
  for (std::size_t s = 0; s < c.surfaces.size(); ++s) {
    std::printf(" surface=%zu down=%zu", c.surfaces[s].size(), c.downsamples[s].size());
  }
  std::printf(" queries=%zu inside=%zu\n", c.queries.queries.size(), inside);
  return 0;
}

int cmd_voxelize(const std::string& input, const std::string& out, const GridFlags& flags) {
  const TriangleMesh mesh = load_mesh(input);
  const SignedField field = compute_signed_field(mesh, flags.config());
  SampleContainer c;
  c.asset_hash = hash_string(fs::path(input).stem().string());
  c.payloads.push_back(voxelize16(field.normalized_input, &field.labels));
  save_occs(out, c);
  std::size_t occupied = 0;
  for (std::uint8_t v : c.payloads.front().voxels) occupied += v;
  std::printf("voxelize %s -> %s: cells=%zu occupied=%zu\n", input.c_str(), out.c_str(),
              c.payloads.front().voxels.size(), occupied);
  return 0;
}

int cmd_metrics(const std::string& a_path, const std::string& b_path, double d, std::size_t points,
                std::size_t emd_points, std::uint64_t seed, int label_res, bool as_json) {
  const TriangleMesh a_raw = load_mesh(a_path);
  const TriangleMesh b_raw = load_mesh(b_path);
  // Both meshes share the frame that normalizes the first one.
  const auto [a, xf] = normalize_mesh(a_raw);
  const TriangleMesh b = transform_mesh(b_raw, xf);

  MetricReport m;
  const PointCloud pa = sample_surface(a, points, derive_seed(seed, "metrics/a"));
  const PointCloud pb = sample_surface(b, points, derive_seed(seed, "metrics/b"));
  m.cd = chamfer(pa, pb);
  m.f_score = f_score(pa, pb, d);
  if (emd_points > 0) {
    const std::size_t n = std::min(emd_points, points);
    m.emd = emd_exact(random_downsample(pa, n, derive_seed(seed, "metrics/emd/a")),
                      random_downsample(pb, n, derive_seed(seed, "metrics/emd/b")));
    m.params.emd_points = n;
  }
  // Solid occupancy from ray labels in the shared frame.
  auto solid_voxels = [&](const TriangleMesh& mesh, LabelGrid& labels) {
    const TriangleBvh bvh(mesh);
    labels = compute_visibility_labels(bvh, label_res, 64, 0.0);
    return VoxelGrid(static_cast<int>(kVoxelConditionRes), voxelize16(mesh, &labels).voxels);
  };
  LabelGrid la, lb;
  m.voxel_iou = voxel_iou(solid_voxels(a, la), solid_voxels(b, lb));
  const double h = la.shape.spacing();
  const double reference = is_watertight(a).watertight ? mesh_volume(a) : la.inside_count() * h * h * h;
  if (reference > 0.0) m.volume_ratio = mesh_volume(b) / reference;
  m.params.fscore_threshold = d;
  m.params.cd_points = points;
  m.params.voxel_resolution = static_cast<int>(kVoxelConditionRes);
  if (as_json) {
    std::cout << m.to_json().dump(2) << "\n";
  } else {
    std::cout << m.to_kv();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoforge: watertight remeshing, sampling and evaluation for 3D datasets"};
  app.require_subcommand(1);

  std::size_t workers = default_worker_count();
  auto add_workers = [&](CLI::App* sub) {
    sub->add_option("--workers", workers, "worker threads (default: GEOFORGE_WORKERS or all cores)");
  };

  GridFlags remesh_flags;
  std::string remesh_in, remesh_out, remesh_grid;
  bool remesh_normalized = false;
  auto* remesh = app.add_subcommand("remesh", "convert a mesh into a watertight mesh");
  remesh->add_option("input", remesh_in, "input mesh (.obj or .ply)")->required();
  remesh->add_option("--out", remesh_out, "output mesh (.obj or .ply)")->required();
  remesh->add_option("--grid", remesh_grid, "also write the signed grid (CLGD)");
  remesh->add_flag("--normalized", remesh_normalized, "keep the output in the normalized [-1,1]^3 frame");
  remesh_flags.add(remesh, 256);
  add_workers(remesh);

  GridFlags sample_flags;
  std::string sample_in, sample_out, sample_surface_sizes = "2048,4096,8192", sample_queries = "8192,8192";
  double sample_sigma = 0.01;
  bool sample_random = false;
  std::uint64_t sample_seed = 0;
  auto* sample = app.add_subcommand("sample", "write surface clouds, downsamples and labeled queries (OCCS)");
  sample->add_option("input", sample_in, "watertight input mesh")->required();
  sample->add_option("--out", sample_out, "output .occs file")->required();
  sample->add_option("--surface", sample_surface_sizes, "surface cloud sizes, comma separated")->capture_default_str();
  sample->add_option("--queries", sample_queries, "uniform,near query counts")->capture_default_str();
  sample->add_option("--sigma", sample_sigma, "near-surface jitter")->capture_default_str();
  sample->add_flag("--random-downsample", sample_random, "random instead of farthest-point downsampling");
  sample->add_option("--seed", sample_seed, "random seed")->capture_default_str();
  sample_flags.add(sample, 128);
  add_workers(sample);

  GridFlags voxel_flags;
  std::string voxel_in, voxel_out;
  auto* voxelize = app.add_subcommand("voxelize", "16^3 occupancy payload (OCCS with one VX16 section)");
  voxelize->add_option("input", voxel_in, "input mesh")->required();
  voxelize->add_option("--out", voxel_out, "output .occs file")->required();
  voxel_flags.add(voxelize, 128);
  add_workers(voxelize);

  std::string metric_a, metric_b;
  double metric_d = kDefaultFScoreThreshold;
  std::size_t metric_points = 8192, metric_emd = 0;
  std::uint64_t metric_seed = 0;
  int metric_res = 64;
  bool metric_json = false;
  auto* metrics = app.add_subcommand("metrics", "CD, EMD, voxel IoU, F-score and volume ratio of b against a");
  metrics->add_option("a", metric_a, "reference mesh")->required();
  metrics->add_option("b", metric_b, "compared mesh")->required();
  metrics->add_option("--fscore-d", metric_d, "F-score distance threshold")->capture_default_str();
  metrics->add_option("--points", metric_points, "surface samples per mesh")->capture_default_str();
  metrics->add_option("--emd-points", metric_emd, "points for exact EMD (0 skips, at most 1024)")->capture_default_str();
  metrics->add_option("--seed", metric_seed, "random seed")->capture_default_str();
  metrics->add_option("--res", metric_res, "label grid resolution for voxel IoU")->capture_default_str();
  metrics->add_flag("--json", metric_json, "print JSON instead of key=value lines");
  add_workers(metrics);

  GridFlags run_flags;
  std::string manifest_path, run_out;
  bool resume = false;
  std::optional<std::uint64_t> run_seed;
  double budget = kDefaultAssetBudgetSeconds;
  auto* run = app.add_subcommand("run", "process every manifest entry");
  run->add_option("manifest", manifest_path, "line-delimited JSON manifest")->required();
  run->add_option("--out", run_out, "output directory (overrides the manifest)");
  run->add_flag("--resume", resume, "skip assets whose outputs exist with matching checksums");
  run->add_option("--seed", run_seed, "global seed (overrides the manifest)");
  run->add_option("--budget", budget, "per-asset wall-clock limit in seconds")->capture_default_str();
  run_flags.add(run, 256);
  add_workers(run);

  std::string validate_dir, validate_out;
  auto* validate = app.add_subcommand("validate", "re-check a pipeline output directory");
  validate->add_option("dir", validate_dir, "output directory")->required()->check(CLI::ExistingDirectory);
  validate->add_option("--out", validate_out, "write the JSON report here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (workers == 0) throw InvalidArgument("--workers must be positive");
    std::unique_ptr<tbb::global_control> limit;
    if (!run->parsed()) {
      limit = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, workers);
    }
    if (remesh->parsed()) return cmd_remesh(remesh_in, remesh_out, remesh_flags, remesh_normalized, remesh_grid);
    if (sample->parsed()) {
      return cmd_sample(sample_in, sample_out, sample_flags, sample_surface_sizes, sample_queries, sample_sigma,
                        sample_random, sample_seed);
    }
    if (voxelize->parsed()) return cmd_voxelize(voxel_in, voxel_out, voxel_flags);
    if (metrics->parsed()) {
      return cmd_metrics(metric_a, metric_b, metric_d, metric_points, metric_emd, metric_seed, metric_res,
                         metric_json);
    }
    if (run->parsed()) {
      Manifest manifest = load_manifest(manifest_path);
      if (run_seed) manifest.seed = *run_seed;
      RunOptions opts;
      opts.workers = workers;
      opts.resume = resume;
      if (!run_out.empty()) opts.output_dir = run_out;
      opts.config.remesh = run_flags.config();
      opts.config.budget_seconds = budget;
      const RunSummary s = run_pipeline(manifest, opts);
      std::printf("run: ok=%zu skipped=%zu failed=%zu seconds=%.2f output=%s\n", s.ok, s.skipped, s.failed,
                  s.seconds, s.output_dir.string().c_str());
      return s.exit_code();
    }
    if (validate->parsed()) {
      const ValidationReport r = validate_outputs(validate_dir);
      print_json(r.to_json(), validate_out);
      std::fprintf(stderr, "validate: %zu assets, %s\n", r.assets.size(), r.ok() ? "all checks pass" : "FAILED");
      return r.ok() ? 0 : 1;
    }
  } catch (const InvalidArgument& e) {
    log_error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log_error(e.what());
    return 1;
  }
  return 0;
}
