// OCCS per-asset sample container.
//
// Layout (little endian):
//   "OCCS" | u32 version = 1 | u64 asset-id hash | u32 section count | u32 0
//   section table: count x { u32 tag, u32 aux, u64 offset, u64 count, u64 bytes }
//   section payloads in table order
//
// Sections, in order: SURF/DOWN pairs (N x 3 f32, N/4 x 3 f32) per surface
// size, QPOS (Q x 3 f32), QLAB (Q u8), QNEA (Q u8 near-surface flags), then
// payload records VX16 (4096 u8), BBX8 (8 x 3 f32), SPRS (512 x 3 f32) and
// PART (2056 x 3 f32: 2048 surface points then the 8 box corners; aux = 8).

#pragma once

#include "geoforge/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace geoforge {

inline constexpr std::uint32_t kOccsVersion = 1;

struct SampleContainer {
  std::uint64_t asset_hash = 0;
  std::vector<PointCloud> surfaces;
  std::vector<PointCloud> downsamples;  // paired with surfaces
  QuerySet queries;
  std::vector<ConditionPayload> payloads;
};

struct OccsSection {
  std::string tag;
  std::uint32_t aux = 0;
  std::uint64_t offset = 0;
  std::uint64_t count = 0;
  std::uint64_t bytes = 0;
};

std::string encode_occs(const SampleContainer& container);
/// Throws IoError on malformed or truncated input.
SampleContainer decode_occs(std::string_view bytes);
/// Header and section table only.
std::vector<OccsSection> read_occs_table(std::string_view bytes, std::uint64_t* asset_hash = nullptr);

void save_occs(const std::filesystem::path& path, const SampleContainer& container);
SampleContainer load_occs(const std::filesystem::path& path);

}  // namespace geoforge
