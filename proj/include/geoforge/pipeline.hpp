// Manifest-driven batch processing: load -> normalize -> remesh -> sample ->
// metrics -> write, with resume, per-asset isolation and validation.
//
// Manifest: one JSON object per line. An optional line
//   {"global": {"output_dir": ..., "seed": ..., "defaults": {...}}}
// sets run-wide values; every other line is
//   {"asset_id": ..., "input_path": ..., "overrides": {...}}
// Relative paths resolve against the manifest's directory.
//
// Per asset the output directory receives <id>.obj (watertight mesh in the
// normalized frame), <id>.occs (samples), <id>.sgrid (signed grid, CLGD),
// <id>.report.json and, written last, <id>.index.json holding the 64-bit
// checksums of the other four. run_summary.json carries counts and timings.

#pragma once

#include "geoforge/metrics.hpp"
#include "geoforge/sampling.hpp"
#include "geoforge/watertight.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geoforge {

inline constexpr double kDefaultAssetBudgetSeconds = 600.0;
inline constexpr std::size_t kDefaultPipelineEmdPoints = 256;

struct PipelineConfig {
  RemeshConfig remesh;
  SamplingSpec sampling;
  double fscore_threshold = kDefaultFScoreThreshold;
  /// Points per cloud for the exact EMD; 0 disables it.
  std::size_t emd_points = kDefaultPipelineEmdPoints;
  std::size_t metric_points = 8192;
  /// Wall-clock limit per asset; none when empty.
  std::optional<double> budget_seconds = kDefaultAssetBudgetSeconds;

  void validate() const;
  nlohmann::json to_json() const;
};

/// Applies a JSON object of overrides (keys as accepted on the command line:
/// res, dirs, tau, iso, shell, labeling, flood_threshold, margin, surface,
/// uniform_queries, near_queries, sigma, fps, fscore_d, emd_points,
/// metric_points, budget_seconds). Unknown keys throw InvalidArgument.
void apply_overrides(PipelineConfig& config, const nlohmann::json& overrides);

struct ManifestEntry {
  std::string asset_id;
  std::filesystem::path input_path;  // resolved
  nlohmann::json overrides = nlohmann::json::object();
};

struct Manifest {
  std::optional<std::filesystem::path> output_dir;  // resolved
  std::uint64_t seed = 0;
  nlohmann::json defaults = nlohmann::json::object();
  std::vector<ManifestEntry> entries;
};

/// Throws InvalidArgument naming the offending line on malformed records,
/// duplicate ids or unknown override keys.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

enum class AssetStatus { ok, skipped, failed };
std::string to_string(AssetStatus status);

struct AssetReport {
  std::string asset_id;
  AssetStatus status = AssetStatus::failed;
  std::string reason;  // failure reason
  std::map<std::string, double> stage_seconds;
  nlohmann::json details = nlohmann::json::object();  // deterministic report contents
};

struct RunOptions {
  std::size_t workers = 1;
  bool resume = false;
  /// Overrides the manifest's output directory.
  std::optional<std::filesystem::path> output_dir;
  PipelineConfig config;
};

struct RunSummary {
  std::size_t ok = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  double seconds = 0.0;
  std::filesystem::path output_dir;
  std::vector<AssetReport> assets;  // manifest order

  int exit_code() const { return failed == 0 ? 0 : 1; }
  nlohmann::json to_json() const;
};

/// GEOFORGE_WORKERS when set and valid, else the hardware thread count.
std::size_t default_worker_count();

/// Per-asset failures are recorded and never abort the batch.
RunSummary run_pipeline(const Manifest& manifest, const RunOptions& options);

/// Files produced for one asset, in write order (the index file last).
std::vector<std::string> asset_output_files(const std::string& asset_id);

struct AssetValidation {
  std::string asset_id;
  std::map<std::string, bool> checks;  // files, checksums, watertight, payload_lengths, label_consistency
  std::vector<std::string> problems;

  bool ok() const;
};

struct ValidationReport {
  std::vector<AssetValidation> assets;
  /// Outputs found without a usable index, and indexed files that are absent.
  std::vector<std::string> missing;

  bool ok() const;
  nlohmann::json to_json() const;
};

ValidationReport validate_outputs(const std::filesystem::path& output_dir);

}  // namespace geoforge
