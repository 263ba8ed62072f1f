// Dense grids over the normalized cube [-1, 1]^3.
//
// A grid of resolution R stores R^3 samples at voxel corners, spacing
// h = 2 / (R - 1), x fastest: index = i + R * (j + R * k).

#pragma once

#include "geoforge/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace geoforge {

struct GridShape {
  int resolution = 0;

  double spacing() const { return 2.0 / (resolution - 1); }
  std::size_t size() const {
    const auto r = static_cast<std::size_t>(resolution);
    return r * r * r;
  }
  std::size_t index(int i, int j, int k) const {
    const auto r = static_cast<std::size_t>(resolution);
    return static_cast<std::size_t>(i) + r * (static_cast<std::size_t>(j) + r * static_cast<std::size_t>(k));
  }
  double coord(int i) const { return -1.0 + i * spacing(); }
  Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
  bool on_boundary(int i, int j, int k) const {
    const int m = resolution - 1;
    return i == 0 || j == 0 || k == 0 || i == m || j == m || k == m;
  }
  bool operator==(const GridShape&) const = default;
};

enum class GridKind : std::uint8_t { udf = 0, signed_field = 1, labels = 2 };

struct ScalarGrid {
  GridShape shape;
  GridKind kind = GridKind::udf;
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(int resolution, GridKind kind)
      : shape{resolution}, kind(kind), values(shape.size(), 0.0) {}

  int resolution() const { return shape.resolution; }
  double spacing() const { return shape.spacing(); }
  double at(int i, int j, int k) const { return values[shape.index(i, j, k)]; }
};

enum class Label : std::uint8_t { outside = 0, inside = 1 };

struct LabelGrid {
  GridShape shape;
  std::vector<Label> labels;

  LabelGrid() = default;
  explicit LabelGrid(int resolution, Label fill = Label::outside)
      : shape{resolution}, labels(shape.size(), fill) {}

  int resolution() const { return shape.resolution; }
  bool inside(std::size_t idx) const { return labels[idx] == Label::inside; }
  std::size_t inside_count() const;
};

/// Trilinear interpolation; points outside the cube are clamped onto it.
double sample_trilinear(const ScalarGrid& grid, const Vec3& p);

/// Copy with every value rounded through 32-bit float, i.e. what a CLGD file
/// stores.
ScalarGrid quantize_to_float(const ScalarGrid& grid);

// CLGD debug dump: "CLGD", u32 version = 1, u32 R, u8 kind, then R^3
// little-endian f32 values (kinds 0, 1) or bytes (kind 2), x fastest.
inline constexpr std::uint32_t kGridFileVersion = 1;

struct GridFile {
  int resolution = 0;
  GridKind kind = GridKind::udf;
  std::vector<float> values;         // kinds 0 and 1
  std::vector<std::uint8_t> labels;  // kind 2

  ScalarGrid to_scalar_grid() const;
  LabelGrid to_label_grid() const;
};

std::string encode_grid(const ScalarGrid& grid);
std::string encode_labels(const LabelGrid& labels);
GridFile decode_grid_file(std::string_view bytes);

void save_grid(const std::filesystem::path& path, const ScalarGrid& grid);
void save_labels(const std::filesystem::path& path, const LabelGrid& labels);
GridFile load_grid_file(const std::filesystem::path& path);

}  // namespace geoforge
