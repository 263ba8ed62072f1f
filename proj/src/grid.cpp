#include "geoforge/grid.hpp"

#include "geoforge/bytes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace geoforge {

std::string read_binary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_binary_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

std::size_t LabelGrid::inside_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::inside));
}

double sample_trilinear(const ScalarGrid& grid, const Vec3& p) {
  const int r = grid.resolution();
  const double h = grid.spacing();
  double f[3];
  int c[3];
  for (int a = 0; a < 3; ++a) {
    const double u = std::clamp((p[a] + 1.0) / h, 0.0, static_cast<double>(r - 1));
    c[a] = std::min(static_cast<int>(u), r - 2);
    f[a] = u - c[a];
  }
  double acc = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) * (dz ? f[2] : 1.0 - f[2]);
        acc += w * grid.at(c[0] + dx, c[1] + dy, c[2] + dz);
      }
    }
  }
  return acc;
}

__attribute__((noinline)) double round_to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

ScalarGrid quantize_to_float(const ScalarGrid& grid) {
  ScalarGrid out = grid;
  for (double& v : out.values) v = round_to_float(v);
  return out;
}

namespace {

void put_header(ByteWriter& w, int resolution, GridKind kind) {
  w.put_bytes("CLGD");
  w.put<std::uint32_t>(kGridFileVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(resolution));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(kind));
}

}  // namespace

std::string encode_grid(const ScalarGrid& grid) {
  if (grid.kind == GridKind::labels) throw InvalidArgument("label kind needs encode_labels");
  ByteWriter w;
  put_header(w, grid.resolution(), grid.kind);
  for (double v : grid.values) w.put<float>(static_cast<float>(v));
  return w.take();
}

std::string encode_labels(const LabelGrid& labels) {
  ByteWriter w;
  put_header(w, labels.resolution(), GridKind::labels);
  for (Label l : labels.labels) w.put<std::uint8_t>(static_cast<std::uint8_t>(l));
  return w.take();
}

GridFile decode_grid_file(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.get_bytes(4) != "CLGD") throw IoError("not a CLGD grid file");
  const auto version = r.get<std::uint32_t>();
  if (version != kGridFileVersion) throw IoError("unsupported CLGD version " + std::to_string(version));
  GridFile file;
  const auto res = r.get<std::uint32_t>();
  if (res < 2 || res > 4096) throw IoError("implausible CLGD resolution " + std::to_string(res));
  file.resolution = static_cast<int>(res);
  const auto kind = r.get<std::uint8_t>();
  if (kind > 2) throw IoError("unknown CLGD kind " + std::to_string(kind));
  file.kind = static_cast<GridKind>(kind);
  const std::size_t n = GridShape{file.resolution}.size();
  const std::size_t elem = file.kind == GridKind::labels ? 1 : 4;
  if (r.remaining() != n * elem) throw IoError("CLGD payload size does not match its header");
  if (file.kind == GridKind::labels) {
    const auto raw = r.get_bytes(n);
    file.labels.assign(raw.begin(), raw.end());
  } else {
    file.values.resize(n);
    std::memcpy(file.values.data(), r.get_bytes(n * 4).data(), n * 4);
  }
  return file;
}

ScalarGrid GridFile::to_scalar_grid() const {
  if (kind == GridKind::labels) throw InvalidArgument("CLGD file holds labels, not values");
  ScalarGrid g(resolution, kind);
  std::copy(values.begin(), values.end(), g.values.begin());
  return g;
}

LabelGrid GridFile::to_label_grid() const {
  if (kind != GridKind::labels) throw InvalidArgument("CLGD file holds values, not labels");
  LabelGrid g(resolution);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    g.labels[i] = labels[i] ? Label::inside : Label::outside;
  }
  return g;
}

void save_grid(const std::filesystem::path& path, const ScalarGrid& grid) {
  write_binary_file(path, encode_grid(grid));
}

void save_labels(const std::filesystem::path& path, const LabelGrid& labels) {
  write_binary_file(path, encode_labels(labels));
}

GridFile load_grid_file(const std::filesystem::path& path) {
  return decode_grid_file(read_binary_file(path));
}

}  // namespace geoforge
