#include "geoforge/occs.hpp"

#include "geoforge/bytes.hpp"

namespace geoforge {
namespace {

constexpr std::size_t kHeaderBytes = 24;
constexpr std::size_t kEntryBytes = 32;

struct PendingSection {
  const char* tag;
  std::uint32_t aux;
  std::uint64_t count;
  std::string data;
};

std::string pack_points(const std::vector<Vec3>& pts) {
  ByteWriter w;
  for (const Vec3& p : pts) {
    w.put<float>(static_cast<float>(p.x()));
    w.put<float>(static_cast<float>(p.y()));
    w.put<float>(static_cast<float>(p.z()));
  }
  return w.take();
}

std::string pack_bytes(const std::vector<std::uint8_t>& v) { return std::string(v.begin(), v.end()); }

std::vector<Vec3> unpack_points(std::string_view data, std::uint64_t count) {
  ByteReader r(data);
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    const float x = r.get<float>();
    const float y = r.get<float>();
    const float z = r.get<float>();
    pts.emplace_back(x, y, z);
  }
  return pts;
}

std::uint32_t fourcc(std::string_view tag) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(tag[i]);
  return v;
}

std::string tag_name(std::uint32_t v) {
  std::string s(4, ' ');
  for (int i = 0; i < 4; ++i) s[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  return s;
}

std::size_t element_bytes(const std::string& tag) {
  if (tag == "QLAB" || tag == "QNEA" || tag == "VX16") return 1;
  return 12;
}

}  // namespace

std::string encode_occs(const SampleContainer& c) {
  if (c.surfaces.size() != c.downsamples.size()) {
    throw InvalidArgument("each surface cloud needs a paired downsample");
  }
  const QuerySet& q = c.queries;
  if (q.labels.size() != q.queries.size() || q.near_flags.size() != q.queries.size()) {
    throw InvalidArgument("query, label and flag counts differ");
  }
  std::vector<PendingSection> sections;
  for (std::size_t s = 0; s < c.surfaces.size(); ++s) {
    sections.push_back({"SURF", 0, c.surfaces[s].size(), pack_points(c.surfaces[s].points)});
    sections.push_back({"DOWN", 0, c.downsamples[s].size(), pack_points(c.downsamples[s].points)});
  }
  sections.push_back({"QPOS", 0, q.queries.size(), pack_points(q.queries)});
  sections.push_back({"QLAB", 0, q.labels.size(), pack_bytes(q.labels)});
  sections.push_back({"QNEA", 0, q.near_flags.size(), pack_bytes(q.near_flags)});
  for (const ConditionPayload& p : c.payloads) {
    switch (p.kind) {
      case PayloadKind::voxel16:
        sections.push_back({"VX16", 0, p.voxels.size(), pack_bytes(p.voxels)});
        break;
      case PayloadKind::bbox8:
        sections.push_back({"BBX8", 0, p.corners.size(), pack_points(p.corners)});
        break;
      case PayloadKind::sparse512:
        sections.push_back({"SPRS", 0, p.points.size(), pack_points(p.points)});
        break;
      case PayloadKind::partial2056: {
        std::vector<Vec3> all = p.points;
        all.insert(all.end(), p.corners.begin(), p.corners.end());
        sections.push_back({"PART", static_cast<std::uint32_t>(p.corners.size()), all.size(), pack_points(all)});
        break;
      }
    }
  }

  ByteWriter w;
  w.put_bytes("OCCS");
  w.put<std::uint32_t>(kOccsVersion);
  w.put<std::uint64_t>(c.asset_hash);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(sections.size()));
  w.put<std::uint32_t>(0);
  std::uint64_t offset = kHeaderBytes + kEntryBytes * sections.size();
  for (const PendingSection& s : sections) {
    w.put<std::uint32_t>(fourcc(s.tag));
    w.put<std::uint32_t>(s.aux);
    w.put<std::uint64_t>(offset);
    w.put<std::uint64_t>(s.count);
    w.put<std::uint64_t>(s.data.size());
    offset += s.data.size();
  }
  for (const PendingSection& s : sections) w.put_bytes(s.data);
  return w.take();
}

std::vector<OccsSection> read_occs_table(std::string_view bytes, std::uint64_t* asset_hash) {
  ByteReader r(bytes);
  if (bytes.size() < kHeaderBytes || r.get_bytes(4) != "OCCS") throw IoError("not an OCCS container");
  const auto version = r.get<std::uint32_t>();
  if (version != kOccsVersion) throw IoError("unsupported OCCS version " + std::to_string(version));
  const auto hash = r.get<std::uint64_t>();
  if (asset_hash) *asset_hash = hash;
  const auto count = r.get<std::uint32_t>();
  r.get<std::uint32_t>();
  if (count > (bytes.size() - kHeaderBytes) / kEntryBytes) throw IoError("OCCS section table is truncated");
  std::vector<OccsSection> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    OccsSection s;
    s.tag = tag_name(r.get<std::uint32_t>());
    s.aux = r.get<std::uint32_t>();
    s.offset = r.get<std::uint64_t>();
    s.count = r.get<std::uint64_t>();
    s.bytes = r.get<std::uint64_t>();
    if (s.offset > bytes.size() || s.bytes > bytes.size() - s.offset) {
      throw IoError("OCCS section " + s.tag + " extends past the end of the file");
    }
    if (s.bytes != s.count * element_bytes(s.tag)) {
      throw IoError("OCCS section " + s.tag + " byte length does not match its count");
    }
    table.push_back(std::move(s));
  }
  return table;
}

SampleContainer decode_occs(std::string_view bytes) {
  SampleContainer c;
  const auto table = read_occs_table(bytes, &c.asset_hash);
  std::uint64_t expected_end = kHeaderBytes + kEntryBytes * table.size();
  for (const OccsSection& s : table) expected_end = std::max(expected_end, s.offset + s.bytes);
  if (expected_end != bytes.size()) throw IoError("OCCS file size does not match its section table");

  for (const OccsSection& s : table) {
    const std::string_view data = bytes.substr(s.offset, s.bytes);
    if (s.tag == "SURF") {
      c.surfaces.push_back({unpack_points(data, s.count), 0, {}});
    } else if (s.tag == "DOWN") {
      c.downsamples.push_back({unpack_points(data, s.count), 0, {}});
    } else if (s.tag == "QPOS") {
      c.queries.queries = unpack_points(data, s.count);
    } else if (s.tag == "QLAB") {
      c.queries.labels.assign(data.begin(), data.end());
    } else if (s.tag == "QNEA") {
      c.queries.near_flags.assign(data.begin(), data.end());
    } else if (s.tag == "VX16") {
      ConditionPayload p;
      p.kind = PayloadKind::voxel16;
      p.voxels.assign(data.begin(), data.end());
      c.payloads.push_back(std::move(p));
    } else if (s.tag == "BBX8") {
      ConditionPayload p;
      p.kind = PayloadKind::bbox8;
      p.corners = unpack_points(data, s.count);
      c.payloads.push_back(std::move(p));
    } else if (s.tag == "SPRS") {
      ConditionPayload p;
      p.kind = PayloadKind::sparse512;
      p.points = unpack_points(data, s.count);
      c.payloads.push_back(std::move(p));
    } else if (s.tag == "PART") {
      if (s.aux > s.count) throw IoError("OCCS partial section has more corners than points");
      ConditionPayload p;
      p.kind = PayloadKind::partial2056;
      auto all = unpack_points(data, s.count);
      p.corners.assign(all.end() - s.aux, all.end());
      all.resize(all.size() - s.aux);
      p.points = std::move(all);
      c.payloads.push_back(std::move(p));
    } else {
      throw IoError("unknown OCCS section " + s.tag);
    }
  }
  if (c.surfaces.size() != c.downsamples.size()) throw IoError("OCCS surface/downsample sections are unpaired");
  const std::size_t nq = c.queries.queries.size();
  if (c.queries.labels.size() != nq || c.queries.near_flags.size() != nq) {
    throw IoError("OCCS query sections disagree in length");
  }
  std::size_t near = 0;
  for (std::uint8_t f : c.queries.near_flags) near += f ? 1 : 0;
  c.queries.near_fraction = nq ? static_cast<double>(near) / nq : 0.0;
  return c;
}

void save_occs(const std::filesystem::path& path, const SampleContainer& container) {
  write_binary_file(path, encode_occs(container));
}

SampleContainer load_occs(const std::filesystem::path& path) {
  return decode_occs(read_binary_file(path));
}

}  // namespace geoforge
