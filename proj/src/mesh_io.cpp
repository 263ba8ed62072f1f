#include "geoforge/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

namespace geoforge {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary PLY I/O assumes a little-endian host");

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return std::move(ss).str();
}

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void fan_triangulate(const std::vector<std::int64_t>& poly, std::vector<Triangle>& out,
                     std::size_t vertex_count, const std::string& where) {
  for (std::int64_t i : poly) {
    if (i < 0 || static_cast<std::size_t>(i) >= vertex_count) {
      throw IoError("face index out of range in " + where);
    }
  }
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    out.push_back({static_cast<std::uint32_t>(poly[0]), static_cast<std::uint32_t>(poly[k]),
                   static_cast<std::uint32_t>(poly[k + 1])});
  }
}

TriangleMesh finish(std::vector<Vec3> vertices, const std::vector<Triangle>& faces,
                    const std::string& provenance, const LoadOptions& options) {
  if (options.drop_degenerate) return mesh_from_faces(std::move(vertices), faces, provenance);
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) throw InvalidArgument("non-finite coordinates in " + provenance);
  }
  std::vector<Triangle> kept;
  kept.reserve(faces.size());
  for (const Triangle& f : faces) {
    if (f[0] != f[1] && f[1] != f[2] && f[0] != f[2]) kept.push_back(f);
  }
  if (kept.empty()) throw InvalidArgument("zero valid triangles in " + provenance);
  const std::size_t dropped = faces.size() - kept.size();
  return TriangleMesh(std::move(vertices), std::move(kept), provenance, dropped);
}

// ---------------------------------------------------------------------------
// OBJ

double parse_double(std::string_view tok, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw IoError("malformed number '" + std::string(tok) + "' in " + where);
  }
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

TriangleMesh parse_obj(const std::string& text, const std::string& where,
                       const LoadOptions& options) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> faces;
  std::vector<std::int64_t> poly;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "v") {
      if (toks.size() < 4) throw IoError("vertex record needs 3 coordinates in " + where);
      vertices.emplace_back(parse_double(toks[1], where), parse_double(toks[2], where),
                            parse_double(toks[3], where));
    } else if (toks[0] == "f") {
      poly.clear();
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const std::string_view ref = toks[k].substr(0, toks[k].find('/'));
        std::int64_t idx = 0;
        const auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
        if (ec != std::errc() || ptr != ref.data() + ref.size() || idx == 0) {
          throw IoError("malformed face index in " + where);
        }
        // 1-based; negative indices count back from the latest vertex.
        poly.push_back(idx > 0 ? idx - 1 : static_cast<std::int64_t>(vertices.size()) + idx);
      }
      if (poly.size() < 3) continue;
      fan_triangulate(poly, faces, vertices.size(), where);
    }
  }
  return finish(std::move(vertices), faces, where, options);
}

// ---------------------------------------------------------------------------
// PLY

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

PlyType ply_type(std::string_view name, const std::string& where) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  throw IoError("unknown PLY type '" + std::string(name) + "' in " + where);
}

std::size_t ply_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8:
      return 1;
    case PlyType::i16:
    case PlyType::u16:
      return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32:
      return 4;
    case PlyType::f64:
      return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> props;
};

class BinaryCursor {
 public:
  BinaryCursor(const std::string& data, std::size_t pos, std::string where)
      : data_(data), pos_(pos), where_(std::move(where)) {}

  double read(PlyType t) {
    const std::size_t n = ply_size(t);
    if (pos_ + n > data_.size()) throw IoError("truncated PLY body in " + where_);
    const char* p = data_.data() + pos_;
    pos_ += n;
    switch (t) {
      case PlyType::i8: return load<std::int8_t>(p);
      case PlyType::u8: return load<std::uint8_t>(p);
      case PlyType::i16: return load<std::int16_t>(p);
      case PlyType::u16: return load<std::uint16_t>(p);
      case PlyType::i32: return load<std::int32_t>(p);
      case PlyType::u32: return load<std::uint32_t>(p);
      case PlyType::f32: return load<float>(p);
      case PlyType::f64: return load<double>(p);
    }
    return 0.0;
  }

 private:
  template <typename T>
  static double load(const char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return static_cast<double>(v);
  }

  const std::string& data_;
  std::size_t pos_;
  std::string where_;
};

class AsciiCursor {
 public:
  AsciiCursor(const std::string& data, std::size_t pos, std::string where)
      : data_(data), pos_(pos), where_(std::move(where)) {}

  double read(PlyType) {
    while (pos_ < data_.size() && std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    std::size_t end = pos_;
    while (end < data_.size() && !std::isspace(static_cast<unsigned char>(data_[end]))) ++end;
    if (end == pos_) throw IoError("truncated PLY body in " + where_);
    const double v = parse_double(std::string_view(data_).substr(pos_, end - pos_), where_);
    pos_ = end;
    return v;
  }

 private:
  const std::string& data_;
  std::size_t pos_;
  std::string where_;
};

template <typename Cursor>
TriangleMesh read_ply_body(Cursor cursor, const std::vector<PlyElement>& elements,
                           const std::string& where, const LoadOptions& options) {
  std::vector<Vec3> vertices;
  std::vector<Triangle> faces;
  std::vector<std::int64_t> poly;
  for (const PlyElement& el : elements) {
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    int xyz[3] = {-1, -1, -1};
    int face_prop = -1;
    for (std::size_t p = 0; p < el.props.size(); ++p) {
      const auto& name = el.props[p].name;
      if (is_vertex && !el.props[p].is_list) {
        if (name == "x") xyz[0] = static_cast<int>(p);
        if (name == "y") xyz[1] = static_cast<int>(p);
        if (name == "z") xyz[2] = static_cast<int>(p);
      }
      if (is_face && el.props[p].is_list &&
          (name == "vertex_indices" || name == "vertex_index")) {
        face_prop = static_cast<int>(p);
      }
    }
    if (is_vertex && (xyz[0] < 0 || xyz[1] < 0 || xyz[2] < 0)) {
      throw IoError("PLY vertex element lacks x/y/z in " + where);
    }
    if (is_vertex) vertices.reserve(el.count);
    for (std::size_t i = 0; i < el.count; ++i) {
      Vec3 v = Vec3::Zero();
      for (std::size_t p = 0; p < el.props.size(); ++p) {
        const PlyProperty& prop = el.props[p];
        if (prop.is_list) {
          const auto n = static_cast<std::int64_t>(cursor.read(prop.count_type));
          if (n < 0) throw IoError("negative PLY list length in " + where);
          const bool keep = is_face && static_cast<int>(p) == face_prop;
          if (keep) poly.clear();
          for (std::int64_t k = 0; k < n; ++k) {
            const double idx = cursor.read(prop.type);
            if (keep) poly.push_back(static_cast<std::int64_t>(idx));
          }
          if (keep && poly.size() >= 3) fan_triangulate(poly, faces, vertices.size(), where);
        } else {
          const double value = cursor.read(prop.type);
          if (is_vertex) {
            for (int a = 0; a < 3; ++a) {
              if (static_cast<int>(p) == xyz[a]) v[a] = value;
            }
          }
        }
      }
      if (is_vertex) vertices.push_back(v);
    }
  }
  return finish(std::move(vertices), faces, where, options);
}

TriangleMesh parse_ply(const std::string& data, const std::string& where,
                       const LoadOptions& options) {
  if (data.rfind("ply", 0) != 0) throw IoError("missing PLY magic in " + where);
  const std::size_t header_end = data.find("end_header");
  if (header_end == std::string::npos) throw IoError("missing end_header in " + where);
  std::size_t body = data.find('\n', header_end);
  if (body == std::string::npos) throw IoError("truncated PLY header in " + where);
  ++body;

  std::vector<PlyElement> elements;
  std::string format;
  std::istringstream header(data.substr(0, header_end));
  std::string line;
  while (std::getline(header, line)) {
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks[0] == "format") {
      if (toks.size() < 2) throw IoError("malformed PLY format line in " + where);
      format = std::string(toks[1]);
    } else if (toks[0] == "element") {
      if (toks.size() < 3) throw IoError("malformed PLY element line in " + where);
      PlyElement el;
      el.name = std::string(toks[1]);
      el.count = static_cast<std::size_t>(parse_double(toks[2], where));
      elements.push_back(std::move(el));
    } else if (toks[0] == "property") {
      if (elements.empty()) throw IoError("PLY property before element in " + where);
      PlyProperty prop;
      if (toks.size() >= 5 && toks[1] == "list") {
        prop.is_list = true;
        prop.count_type = ply_type(toks[2], where);
        prop.type = ply_type(toks[3], where);
        prop.name = std::string(toks[4]);
      } else if (toks.size() >= 3) {
        prop.type = ply_type(toks[1], where);
        prop.name = std::string(toks[2]);
      } else {
        throw IoError("malformed PLY property line in " + where);
      }
      elements.back().props.push_back(std::move(prop));
    }
  }
  if (format == "ascii") return read_ply_body(AsciiCursor(data, body, where), elements, where, options);
  if (format == "binary_little_endian") {
    return read_ply_body(BinaryCursor(data, body, where), elements, where, options);
  }
  throw IoError("unsupported PLY format '" + format + "' in " + where);
}

// Shortest double text of the float value, so a double parser reads back the
// float exactly.
std::string float_text(float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<double>(v));
  return std::string(buf, ptr);
}

}  // namespace

TriangleMesh load_mesh(const std::filesystem::path& path, const LoadOptions& options) {
  const std::string data = read_file(path);
  const std::string ext = lower_ext(path);
  if (ext == ".obj") return parse_obj(data, path.string(), options);
  if (ext == ".ply") return parse_ply(data, path.string(), options);
  throw IoError("unsupported mesh format: " + path.string());
}

std::string mesh_to_obj(const TriangleMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertex_count() * 40 + mesh.triangle_count() * 24);
  for (const Vec3& v : mesh.vertices()) {
    out += "v ";
    out += float_text(static_cast<float>(v.x()));
    out += ' ';
    out += float_text(static_cast<float>(v.y()));
    out += ' ';
    out += float_text(static_cast<float>(v.z()));
    out += '\n';
  }
  for (const Triangle& t : mesh.triangles()) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  return out;
}

std::string mesh_to_ply(const TriangleMesh& mesh) {
  std::string out = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                    std::to_string(mesh.vertex_count()) +
                    "\nproperty float x\nproperty float y\nproperty float z\nelement face " +
                    std::to_string(mesh.triangle_count()) +
                    "\nproperty list uchar int vertex_indices\nend_header\n";
  const std::size_t head = out.size();
  out.resize(head + mesh.vertex_count() * 12 + mesh.triangle_count() * 13);
  char* p = out.data() + head;
  for (const Vec3& v : mesh.vertices()) {
    for (int a = 0; a < 3; ++a) {
      const float f = static_cast<float>(v[a]);
      std::memcpy(p, &f, 4);
      p += 4;
    }
  }
  for (const Triangle& t : mesh.triangles()) {
    *p++ = 3;
    for (std::uint32_t i : t) {
      const auto s = static_cast<std::int32_t>(i);
      std::memcpy(p, &s, 4);
      p += 4;
    }
  }
  return out;
}

void save_mesh(const std::filesystem::path& path, const TriangleMesh& mesh) {
  const std::string ext = lower_ext(path);
  std::string data;
  if (ext == ".obj") {
    data = mesh_to_obj(mesh);
  } else if (ext == ".ply") {
    data = mesh_to_ply(mesh);
  } else {
    throw IoError("unsupported mesh format: " + path.string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("cannot write " + path.string());
}

}  // namespace geoforge
