#include "geoforge/pipeline.hpp"

#include "geoforge/bytes.hpp"
#include "geoforge/log.hpp"
#include "geoforge/mesh_io.hpp"
#include "geoforge/occs.hpp"
#include "geoforge/random.hpp"

#include <tbb/blocked_range.h>
#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

namespace geoforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

constexpr int kPartialAttempts = 16;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t checksum(std::string_view bytes) {
  Fnv1a64 h;
  h.update(bytes);
  return h.digest();
}

void write_atomic(const fs::path& path, std::string_view bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_binary_file(tmp, bytes);
  fs::rename(tmp, path);
}

void remove_quietly(const fs::path& path) {
  std::error_code ec;
  fs::remove(path, ec);
}

template <typename T>
T read_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InvalidArgument("override '" + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw InvalidArgument("override '" + key + "' must be a nonnegative integer");
    }
  }
  return v.get<T>();
}

struct Stopwatch {
  Clock::time_point start = Clock::now();
  double lap() {
    const auto now = Clock::now();
    const double s = std::chrono::duration<double>(now - start).count();
    start = now;
    return s;
  }
};

json mesh_flags(const TriangleMesh& mesh) {
  const WatertightReport w = is_watertight(mesh);
  return {{"triangle_count", mesh.triangle_count()},
          {"vertex_count", mesh.vertex_count()},
          {"dropped_degenerate", mesh.dropped_degenerate()},
          {"boundary_edges", w.boundary_edges},
          {"nonmanifold_edges", w.nonmanifold_edges},
          {"inconsistent_edges", w.inconsistent_edges},
          {"components", count_components(mesh)},
          {"watertight", w.watertight}};
}


SampleContainer build_samples(const RemeshResult& result, const PipelineConfig& config,
                              std::uint64_t seed, const Deadline& deadline) {
  const SamplingSpec& spec = config.sampling;
  const TriangleMesh& mesh = result.mesh;
  SampleContainer c;
  for (std::size_t n : spec.surface_sizes) {
    const std::string tag = std::to_string(n);
    PointCloud surface = sample_surface(mesh, n, derive_seed(seed, "surface/" + tag));
    const std::size_t m = n / spec.downsample_ratio;
    PointCloud down = spec.farthest_point ? fps_downsample(surface, m, derive_seed(seed, "down/" + tag))
                                          : random_downsample(surface, m, derive_seed(seed, "down/" + tag));
    c.surfaces.push_back(std::move(surface));
    c.downsamples.push_back(std::move(down));
    deadline.check();
  }
  // Near-surface queries jitter the densest cloud.
  std::size_t densest = 0;
  for (std::size_t s = 1; s < c.surfaces.size(); ++s) {
    if (c.surfaces[s].size() > c.surfaces[densest].size()) densest = s;
  }
  // Labels come from the float grid that is written to disk, so they can be
  // recomputed exactly from the outputs.
  const ScalarGrid stored = quantize_to_float(result.signed_grid);
  SamplingSpec qspec = spec;
  qspec.seed = seed;
  c.queries = sample_queries(stored, c.surfaces[densest], qspec, config.remesh.iso_level * stored.spacing());

  c.payloads.push_back(voxelize16(mesh, &result.label_grid));
  c.payloads.push_back(bbox_corners(mesh));
  c.payloads.push_back(sparse_cloud(mesh, derive_seed(seed, "sparse")));
  for (int attempt = 0;; ++attempt) {
    if (attempt == kPartialAttempts) throw GeoError("no extension box leaves 5% of the surface uncovered");
    const Aabb box = random_extension_box(mesh.bounds(), derive_seed(seed, "partial/box/" + std::to_string(attempt)));
    if (surface_area_in_box(mesh, box) >= 0.95 * mesh.surface_area()) continue;
    c.payloads.push_back(make_partial(mesh, box, derive_seed(seed, "partial/points")));
    break;
  }
  return c;
}

MetricReport compute_metrics(const TriangleMesh& input, const RemeshResult& result,
                             const ConditionPayload& out_voxels, const PipelineConfig& config,
                             std::uint64_t seed) {
  MetricReport m;
  const PointCloud a = sample_surface(result.normalized_input, config.metric_points, derive_seed(seed, "metrics/input"));
  const PointCloud b = sample_surface(result.mesh, config.metric_points, derive_seed(seed, "metrics/output"));
  m.cd = chamfer(a, b);
  m.f_score = f_score(a, b, config.fscore_threshold);
  if (config.emd_points > 0) {
    const std::size_t n = std::min(config.emd_points, config.metric_points);
    m.emd = emd_exact(random_downsample(a, n, derive_seed(seed, "metrics/emd/input")),
                      random_downsample(b, n, derive_seed(seed, "metrics/emd/output")));
    m.params.emd_points = n;
  }
  const int vr = static_cast<int>(kVoxelConditionRes);
  const VoxelGrid vin(vr, voxelize16(result.normalized_input, &result.label_grid).voxels);
  const VoxelGrid vout(vr, out_voxels.voxels);
  m.voxel_iou = voxel_iou(vin, vout);
  // a bare sheet has no inside labels, so there is nothing to conserve
  if (reference_volume(input, result) > 0.0) m.volume_ratio = volume_conservation(input, result);
  m.params.fscore_threshold = config.fscore_threshold;
  m.params.cd_points = config.metric_points;
  m.params.voxel_resolution = vr;
  return m;
}

std::string config_fingerprint(const PipelineConfig& config, std::uint64_t seed, std::uint64_t input_sum) {
  json j = config.to_json();
  j["seed"] = seed;
  j["input_checksum"] = hex64(input_sum);
  return hex64(hash_string(j.dump()));
}

std::string index_name(const std::string& id) { return id + ".index.json"; }

// True when the asset's index matches the fingerprint and every listed file
// is present with its recorded checksum.
bool outputs_complete(const fs::path& dir, const std::string& id, const std::string& fingerprint) {
  try {
    const fs::path index = dir / index_name(id);
    if (!fs::exists(index)) return false;
    const json j = json::parse(read_binary_file(index));
    if (j.value("config", std::string()) != fingerprint) return false;
    const json& files = j.at("files");
    const auto expected = asset_output_files(id);
    for (std::size_t f = 0; f + 1 < expected.size(); ++f) {
      const std::string& name = expected[f];
      if (!files.contains(name)) return false;
      if (!fs::exists(dir / name)) return false;
      if (files.at(name).get<std::string>() != hex64(checksum(read_binary_file(dir / name)))) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void remove_asset_outputs(const fs::path& dir, const std::string& id) {
  for (const std::string& name : asset_output_files(id)) {
    remove_quietly(dir / name);
    remove_quietly(dir / (name + ".tmp"));
  }
}

AssetReport process_asset(const ManifestEntry& entry, const PipelineConfig& base, std::uint64_t run_seed,
                          const fs::path& out_dir, bool resume) {
  AssetReport report;
  report.asset_id = entry.asset_id;
  const std::uint64_t seed = derive_seed(run_seed, entry.asset_id);
  Stopwatch clock;
  try {
    PipelineConfig config = base;
    apply_overrides(config, entry.overrides);
    config.sampling.seed = seed;
    config.validate();
    const Deadline deadline = config.budget_seconds ? Deadline(std::chrono::duration<double>(*config.budget_seconds))
                                                    : Deadline();

    const std::string input_bytes = read_binary_file(entry.input_path);
    const std::string fingerprint = config_fingerprint(config, seed, checksum(input_bytes));
    if (resume && outputs_complete(out_dir, entry.asset_id, fingerprint)) {
      report.status = AssetStatus::skipped;
      report.stage_seconds["resume_check"] = clock.lap();
      return report;
    }
    // A stale index must never vouch for files that are about to change.
    remove_quietly(out_dir / index_name(entry.asset_id));

    const TriangleMesh input = load_mesh(entry.input_path);
    report.stage_seconds["load"] = clock.lap();
    deadline.check();

    const RemeshResult result = remesh_watertight(input, config.remesh, &deadline);
    report.stage_seconds["remesh"] = clock.lap();

    const SampleContainer samples = [&] {
      SampleContainer c = build_samples(result, config, seed, deadline);
      c.asset_hash = hash_string(entry.asset_id);
      return c;
    }();
    report.stage_seconds["sample"] = clock.lap();
    deadline.check();

    const MetricReport metrics = compute_metrics(input, result, samples.payloads.front(), config, seed);
    report.stage_seconds["metrics"] = clock.lap();
    deadline.check();

    const double h = result.signed_grid.spacing();
    json details;
    details["asset_id"] = entry.asset_id;
    details["status"] = "ok";
    details["seed"] = seed;
    details["input"] = mesh_flags(input);
    details["output"] = mesh_flags(result.mesh);
    details["watertight"] = is_watertight(result.mesh).watertight;
    details["volume"] = {{"normalized_input", mesh_volume(result.normalized_input)},
                         {"output", result.stats.output_volume},
                         {"label_reference", static_cast<double>(result.label_grid.inside_count()) * h * h * h},
                         {"inside_fraction", result.stats.inside_fraction}};
    details["normalization"] = {{"center", {result.transform.center.x(), result.transform.center.y(), result.transform.center.z()}},
                                {"scale", result.transform.scale},
                                {"margin", result.margin}};
    details["metrics"] = metrics.to_json();
    details["query_iso"] = config.remesh.iso_level * h;
    details["config"] = config.to_json();
    report.details = details;

    const auto names = asset_output_files(entry.asset_id);
    const std::vector<std::string> contents = {mesh_to_obj(result.mesh), encode_occs(samples),
                                               encode_grid(result.signed_grid), details.dump(2) + "\n"};
    json index;
    index["asset_id"] = entry.asset_id;
    index["config"] = fingerprint;
    index["files"] = json::object();
    for (std::size_t f = 0; f < contents.size(); ++f) {
      write_atomic(out_dir / names[f], contents[f]);
      index["files"][names[f]] = hex64(checksum(contents[f]));
    }
    write_atomic(out_dir / names.back(), index.dump(2) + "\n");
    report.stage_seconds["write"] = clock.lap();
    report.status = AssetStatus::ok;
  } catch (const std::exception& e) {
    remove_asset_outputs(out_dir, entry.asset_id);
    report.status = AssetStatus::failed;
    report.reason = e.what();
    report.details = json::object();
  }
  return report;
}

void check_asset_id(const std::string& id, std::size_t line) {
  const bool bad = id.empty() || id == "." || id == ".." ||
                   id.find_first_of("/\\") != std::string::npos || id.find('\0') != std::string::npos;
  if (bad) throw InvalidArgument("manifest line " + std::to_string(line) + ": invalid asset_id '" + id + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  remesh.validate();
  sampling.validate();
  if (!(fscore_threshold > 0.0)) throw InvalidArgument("f-score threshold must be positive");
  if (emd_points > kMaxEmdPoints) throw InvalidArgument("emd_points exceeds the exact-assignment cap");
  if (metric_points == 0) throw InvalidArgument("metric_points must be positive");
  if (budget_seconds && !(*budget_seconds > 0.0)) throw InvalidArgument("budget must be positive");
}

json PipelineConfig::to_json() const {
  json j;
  j["res"] = remesh.grid_res;
  j["dirs"] = remesh.directions;
  j["tau"] = remesh.escape_threshold;
  j["iso"] = remesh.iso_level;
  j["shell"] = remesh.shell_epsilon ? json(*remesh.shell_epsilon) : json(nullptr);
  j["labeling"] = to_string(remesh.labeling);
  j["flood_threshold"] = remesh.flood_open_threshold;
  j["margin"] = remesh.margin;
  j["ray_t_min"] = remesh.ray_t_min;
  j["surface"] = sampling.surface_sizes;
  j["downsample_ratio"] = sampling.downsample_ratio;
  j["uniform_queries"] = sampling.uniform_queries;
  j["near_queries"] = sampling.near_queries;
  j["sigma"] = sampling.near_sigma;
  j["fps"] = sampling.farthest_point;
  j["fscore_d"] = fscore_threshold;
  j["emd_points"] = emd_points;
  j["metric_points"] = metric_points;
  j["budget_seconds"] = budget_seconds ? json(*budget_seconds) : json(nullptr);
  return j;
}

void apply_overrides(PipelineConfig& c, const json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw InvalidArgument("overrides must be a JSON object");
  for (const auto& [key, v] : overrides.items()) {
    if (key == "res") {
      c.remesh.grid_res = read_number<int>(v, key);
    } else if (key == "dirs") {
      c.remesh.directions = read_number<int>(v, key);
    } else if (key == "tau") {
      c.remesh.escape_threshold = read_number<double>(v, key);
    } else if (key == "iso") {
      c.remesh.iso_level = read_number<double>(v, key);
    } else if (key == "shell") {
      c.remesh.shell_epsilon = v.is_null() ? std::nullopt : std::optional<double>(read_number<double>(v, key));
    } else if (key == "labeling") {
      if (!v.is_string()) throw InvalidArgument("override 'labeling' must be a string");
      c.remesh.labeling = labeling_mode_from_string(v.get<std::string>());
    } else if (key == "flood_threshold") {
      c.remesh.flood_open_threshold = read_number<double>(v, key);
    } else if (key == "margin") {
      c.remesh.margin = read_number<double>(v, key);
    } else if (key == "surface") {
      c.sampling.surface_sizes.clear();
      if (v.is_array()) {
        for (const json& n : v) c.sampling.surface_sizes.push_back(read_number<std::size_t>(n, key));
      } else {
        c.sampling.surface_sizes.push_back(read_number<std::size_t>(v, key));
      }
    } else if (key == "uniform_queries") {
      c.sampling.uniform_queries = read_number<std::size_t>(v, key);
    } else if (key == "near_queries") {
      c.sampling.near_queries = read_number<std::size_t>(v, key);
    } else if (key == "sigma") {
      c.sampling.near_sigma = read_number<double>(v, key);
    } else if (key == "fps") {
      if (!v.is_boolean()) throw InvalidArgument("override 'fps' must be a boolean");
      c.sampling.farthest_point = v.get<bool>();
    } else if (key == "fscore_d") {
      c.fscore_threshold = read_number<double>(v, key);
    } else if (key == "emd_points") {
      c.emd_points = read_number<std::size_t>(v, key);
    } else if (key == "metric_points") {
      c.metric_points = read_number<std::size_t>(v, key);
    } else if (key == "budget_seconds") {
      c.budget_seconds = v.is_null() ? std::nullopt : std::optional<double>(read_number<double>(v, key));
    } else {
      throw InvalidArgument("unknown override '" + key + "'");
    }
  }
}

Manifest parse_manifest(std::string_view text, const fs::path& base_dir) {
  Manifest m;
  std::set<std::string> seen;
  bool have_global = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw InvalidArgument(where + "malformed JSON (" + e.what() + ")");
    }
    if (!rec.is_object()) throw InvalidArgument(where + "expected a JSON object");
    try {
      if (rec.contains("global")) {
        if (have_global) throw InvalidArgument("duplicate global record");
        if (rec.size() != 1) throw InvalidArgument("global record has extra keys");
        have_global = true;
        const json& g = rec.at("global");
        for (const auto& [key, v] : g.items()) {
          if (key == "output_dir") {
            const fs::path p = v.get<std::string>();
            m.output_dir = p.is_absolute() ? p : base_dir / p;
          } else if (key == "seed") {
            m.seed = v.get<std::uint64_t>();
          } else if (key == "defaults") {
            PipelineConfig probe;
            apply_overrides(probe, v);
            m.defaults = v;
          } else {
            throw InvalidArgument("unknown global key '" + key + "'");
          }
        }
        continue;
      }
      ManifestEntry e;
      for (const auto& [key, v] : rec.items()) {
        if (key != "asset_id" && key != "input_path" && key != "overrides") {
          throw InvalidArgument("unknown key '" + key + "'");
        }
      }
      e.asset_id = rec.at("asset_id").get<std::string>();
      check_asset_id(e.asset_id, line_no);
      const fs::path p = rec.at("input_path").get<std::string>();
      e.input_path = p.is_absolute() ? p : base_dir / p;
      if (rec.contains("overrides")) {
        PipelineConfig probe;
        apply_overrides(probe, rec.at("overrides"));
        e.overrides = rec.at("overrides");
      }
      if (!seen.insert(e.asset_id).second) throw InvalidArgument("duplicate asset_id '" + e.asset_id + "'");
      m.entries.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw InvalidArgument(where + e.what());
    } catch (const InvalidArgument& e) {
      const std::string msg = e.what();
      throw InvalidArgument(msg.rfind("manifest line", 0) == 0 ? msg : where + msg);
    }
  }
  return m;
}

Manifest load_manifest(const fs::path& path) {
  return parse_manifest(read_binary_file(path), path.parent_path());
}

std::string to_string(AssetStatus status) {
  switch (status) {
    case AssetStatus::ok:
      return "ok";
    case AssetStatus::skipped:
      return "skipped";
    case AssetStatus::failed:
      return "failed";
  }
  return "failed";
}

std::vector<std::string> asset_output_files(const std::string& id) {
  return {id + ".obj", id + ".occs", id + ".sgrid", id + ".report.json", index_name(id)};
}

std::size_t default_worker_count() {
  if (const char* env = std::getenv("GEOFORGE_WORKERS")) {
    std::size_t n = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, n);
    if (ec == std::errc() && ptr == end && n > 0) return n;
    log_warning(std::string("ignoring invalid GEOFORGE_WORKERS value '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

json RunSummary::to_json() const {
  json j;
  j["ok"] = ok;
  j["skipped"] = skipped;
  j["failed"] = failed;
  j["seconds"] = seconds;
  j["output_dir"] = output_dir.string();
  j["assets"] = json::array();
  for (const AssetReport& a : assets) {
    json r{{"asset_id", a.asset_id}, {"status", to_string(a.status)}, {"stage_seconds", a.stage_seconds}};
    if (a.status == AssetStatus::failed) r["reason"] = a.reason;
    j["assets"].push_back(std::move(r));
  }
  return j;
}

RunSummary run_pipeline(const Manifest& manifest, const RunOptions& options) {
  const auto start = Clock::now();
  RunSummary summary;
  const std::optional<fs::path> dir = options.output_dir ? options.output_dir : manifest.output_dir;
  if (!dir) throw InvalidArgument("no output directory given (manifest global.output_dir or --out)");
  summary.output_dir = *dir;
  fs::create_directories(*dir);

  PipelineConfig config = options.config;
  apply_overrides(config, manifest.defaults);
  config.validate();

  // Leftovers of an interrupted run are never part of the output set.
  for (const auto& item : fs::directory_iterator(*dir)) {
    if (item.is_regular_file() && item.path().extension() == ".tmp") remove_quietly(item.path());
  }

  const std::size_t n = manifest.entries.size();
  summary.assets.resize(n);
  const int workers = static_cast<int>(std::max<std::size_t>(1, options.workers));
  // Lift the default thread cap (the core count) to the requested width.
  const tbb::global_control width(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(workers));
  tbb::task_arena arena(workers);
  arena.execute([&] {
    tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n, 1), [&](const tbb::blocked_range<std::size_t>& r) {
      for (std::size_t i = r.begin(); i < r.end(); ++i) {
        const ManifestEntry& e = manifest.entries[i];
        summary.assets[i] = process_asset(e, config, manifest.seed, *dir, options.resume);
        const AssetReport& a = summary.assets[i];
        if (a.status == AssetStatus::failed) {
          log_error(e.asset_id + ": failed: " + a.reason);
        } else {
          log_info(e.asset_id + ": " + to_string(a.status));
        }
      }
    });
  });

  for (const AssetReport& a : summary.assets) {
    if (a.status == AssetStatus::ok) ++summary.ok;
    if (a.status == AssetStatus::skipped) ++summary.skipped;
    if (a.status == AssetStatus::failed) ++summary.failed;
  }
  summary.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  json j = summary.to_json();
  j["workers"] = workers;
  write_atomic(*dir / "run_summary.json", j.dump(2) + "\n");
  return summary;
}

bool AssetValidation::ok() const {
  return problems.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

bool ValidationReport::ok() const {
  return missing.empty() && std::all_of(assets.begin(), assets.end(), [](const AssetValidation& a) { return a.ok(); });
}

json ValidationReport::to_json() const {
  json j;
  j["ok"] = ok();
  j["missing"] = missing;
  j["assets"] = json::array();
  for (const AssetValidation& a : assets) {
    j["assets"].push_back({{"asset_id", a.asset_id}, {"ok", a.ok()}, {"checks", a.checks}, {"problems", a.problems}});
  }
  return j;
}

namespace {

void check_payload_lengths(const SampleContainer& c, AssetValidation& v) {
  bool ok = !c.surfaces.empty();
  if (!ok) v.problems.push_back("no surface clouds");
  for (std::size_t s = 0; s < c.surfaces.size(); ++s) {
    const std::size_t n = c.surfaces[s].size();
    if (n == 0 || c.downsamples[s].size() * 4 != n) {
      ok = false;
      v.problems.push_back("downsample of the " + std::to_string(n) + "-point cloud has " +
                           std::to_string(c.downsamples[s].size()) + " points");
    }
  }
  std::map<PayloadKind, std::size_t> want = {{PayloadKind::voxel16, 4096},
                                             {PayloadKind::bbox8, kBoxCorners},
                                             {PayloadKind::sparse512, kSparseConditionPoints},
                                             {PayloadKind::partial2056, kPartialConditionPoints + kBoxCorners}};
  for (const ConditionPayload& p : c.payloads) {
    const auto it = want.find(p.kind);
    if (it == want.end()) continue;
    const bool corners_ok = p.kind != PayloadKind::partial2056 || p.corners.size() == kBoxCorners;
    if (p.length() != it->second || !corners_ok) {
      ok = false;
      v.problems.push_back("payload " + std::to_string(static_cast<int>(p.kind)) + " has length " +
                           std::to_string(p.length()) + ", expected " + std::to_string(it->second));
    }
    want.erase(it);
  }
  for (const auto& [kind, len] : want) {
    ok = false;
    v.problems.push_back("payload " + std::to_string(static_cast<int>(kind)) + " is missing");
  }
  v.checks["payload_lengths"] = ok;
}

AssetValidation validate_asset(const fs::path& dir, const std::string& id, std::vector<std::string>& missing) {
  AssetValidation v;
  v.asset_id = id;
  const auto names = asset_output_files(id);
  json index;
  try {
    index = json::parse(read_binary_file(dir / names.back()));
  } catch (const std::exception& e) {
    v.problems.push_back(std::string("unreadable index: ") + e.what());
    v.checks["files"] = false;
    return v;
  }

  bool present = true, sums = true;
  for (std::size_t f = 0; f + 1 < names.size(); ++f) {
    const fs::path p = dir / names[f];
    if (!fs::exists(p)) {
      present = false;
      missing.push_back(names[f]);
      continue;
    }
    const std::string want = index.contains("files") ? index["files"].value(names[f], std::string()) : "";
    if (want != hex64(checksum(read_binary_file(p)))) {
      sums = false;
      v.problems.push_back("checksum mismatch: " + names[f]);
    }
  }
  v.checks["files"] = present;
  v.checks["checksums"] = sums;

  try {
    const TriangleMesh mesh = load_mesh(dir / names[0], LoadOptions{.drop_degenerate = false});
    const WatertightReport w = is_watertight(mesh);
    v.checks["watertight"] = w.watertight;
    if (!w.watertight) {
      v.problems.push_back("mesh has " + std::to_string(w.boundary_edges) + " boundary and " +
                           std::to_string(w.nonmanifold_edges) + " non-manifold edges");
    }
  } catch (const std::exception& e) {
    v.checks["watertight"] = false;
    v.problems.push_back(std::string("mesh: ") + e.what());
  }

  std::optional<SampleContainer> samples;
  try {
    samples = load_occs(dir / names[1]);
    check_payload_lengths(*samples, v);
  } catch (const std::exception& e) {
    v.checks["payload_lengths"] = false;
    v.problems.push_back(std::string("samples: ") + e.what());
  }

  try {
    if (!samples) throw GeoError("no readable samples");
    const ScalarGrid grid = load_grid_file(dir / names[2]).to_scalar_grid();
    if (grid.kind != GridKind::signed_field) throw GeoError("grid file is not a signed field");
    const json report = json::parse(read_binary_file(dir / names[3]));
    const double iso = report.at("query_iso").get<double>();
    const QuerySet& q = samples->queries;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < q.queries.size(); ++i) {
      const std::uint8_t expect = query_inside(grid, q.queries[i], iso) ? 1 : 0;
      wrong += q.labels[i] != expect;
    }
    v.checks["label_consistency"] = wrong == 0;
    if (wrong) v.problems.push_back(std::to_string(wrong) + " query labels disagree with the signed grid");
  } catch (const std::exception& e) {
    v.checks["label_consistency"] = false;
    v.problems.push_back(std::string("labels: ") + e.what());
  }
  return v;
}

}  // namespace

ValidationReport validate_outputs(const fs::path& dir) {
  ValidationReport report;
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::set<std::string> indexed, seen;
  const std::string index_suffix = ".index.json";
  for (const auto& item : fs::directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const std::string name = item.path().filename().string();
    auto strip = [&](const std::string& suffix) -> std::optional<std::string> {
      if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return name.substr(0, name.size() - suffix.size());
      }
      return std::nullopt;
    };
    if (auto id = strip(index_suffix)) {
      indexed.insert(*id);
      continue;
    }
    for (const char* suffix : {".obj", ".occs", ".sgrid", ".report.json"}) {
      if (auto id = strip(suffix)) seen.insert(*id);
    }
  }
  for (const std::string& id : seen) {
    if (!indexed.count(id)) report.missing.push_back(index_name(id));
  }
  for (const std::string& id : indexed) report.assets.push_back(validate_asset(dir, id, report.missing));
  return report;
}

}  // namespace geoforge
