#include "lfloc/map_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace lfloc {

namespace {

constexpr std::array<char, 4> kMagic{'L', 'F', 'M', '1'};
constexpr std::array<Channel, 4> kChannelOrder{Channel::line_raster, Channel::shift, Channel::dist,
                                               Channel::occupancy};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }

 private:
  std::vector<std::uint8_t>& out_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& in, std::size_t pos) : in_(in), pos_(pos) {}

  template <typename U>
  U uint(const char* field) {
    need(sizeof(U), field);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    pos_ += sizeof(U);
    return v;
  }
  double f64(const char* field) { return std::bit_cast<double>(uint<std::uint64_t>(field)); }

  void f32_block(std::vector<float>& dst, const char* field) {
    need(dst.size() * 4, field);
    for (float& v : dst) {
      std::uint32_t bits = 0;
      for (std::size_t i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
      v = std::bit_cast<float>(bits);
      pos_ += 4;
    }
  }
  [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) const {
    if (in_.size() - pos_ < n) {
      throw MapFileError(MapFileError::Kind::truncated,
                         std::string("map file truncated while reading ") + field);
    }
  }

  const std::vector<std::uint8_t>& in_;
  std::size_t pos_;
};

Point2 point_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw MapError("vector map: point must be [x, y], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::vector<std::uint8_t> encode_map(const ProbMap& pmap) {
  const MapMeta& meta = pmap.meta();
  std::vector<std::uint8_t> out;
  out.reserve(64 + kChannelOrder.size() * (1 + 4 * static_cast<std::size_t>(meta.width) * meta.height));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  Writer w(out);
  w.uint(kMapFormatVersion);
  w.uint(meta.width);
  w.uint(meta.height);
  w.f64(meta.resolution);
  w.f64(meta.origin.x);
  w.f64(meta.origin.y);
  w.f64(pmap.sigma_shift());
  w.f64(pmap.alpha());
  w.uint(static_cast<std::uint8_t>(kChannelOrder.size()));
  for (Channel ch : kChannelOrder) {
    w.uint(static_cast<std::uint8_t>(ch));
    for (float v : pmap.channel(ch).data()) w.f32(v);
  }
  return out;
}

ProbMap decode_map(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagic.size()) {
    throw MapFileError(MapFileError::Kind::truncated, "map file truncated while reading magic");
  }
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    throw MapFileError(MapFileError::Kind::bad_magic, "bad magic: not an LFM1 map file");
  }
  Reader r(bytes, kMagic.size());
  const auto version = r.uint<std::uint16_t>("format_version");
  if (version != kMapFormatVersion) {
    throw MapFileError(MapFileError::Kind::version_mismatch,
                       "unsupported map format version " + std::to_string(version));
  }
  MapMeta meta;
  meta.width = r.uint<std::uint32_t>("width");
  meta.height = r.uint<std::uint32_t>("height");
  meta.resolution = r.f64("resolution");
  meta.origin.x = r.f64("origin_x");
  meta.origin.y = r.f64("origin_y");
  const double sigma_shift = r.f64("sigma_shift");
  const double alpha = r.f64("alpha");
  const auto count = r.uint<std::uint8_t>("channel_count");

  const std::size_t pixels = static_cast<std::size_t>(meta.width) * meta.height;
  std::array<Grid<float>, 4> grids;
  std::array<bool, 4> seen{};
  for (std::uint8_t c = 0; c < count; ++c) {
    const auto id = r.uint<std::uint8_t>("channel_id");
    if (id < 1 || id > 4) {
      throw MapFileError(MapFileError::Kind::unknown_channel,
                         "unknown channel id " + std::to_string(id));
    }
    // Check the size before allocating so a corrupt header cannot request gigabytes.
    if (r.remaining() < pixels * 4) {
      throw MapFileError(MapFileError::Kind::truncated, "map file truncated inside channel data");
    }
    Grid<float> g(meta.width, meta.height);
    r.f32_block(g.data(), "channel data");
    grids[id - 1] = std::move(g);
    seen[id - 1] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) {
      throw MapFileError(MapFileError::Kind::missing_channel,
                         std::string("map file lacks channel ") +
                             channel_name(static_cast<Channel>(i + 1)));
    }
  }
  try {
    return {meta, sigma_shift, alpha, std::move(grids[0]), std::move(grids[1]),
            std::move(grids[2]), std::move(grids[3])};
  } catch (const MapError& e) {
    throw MapFileError(MapFileError::Kind::io, std::string("invalid map header: ") + e.what());
  }
}

void save_map(const ProbMap& pmap, const std::filesystem::path& path) {
  const auto bytes = encode_map(pmap);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MapFileError(MapFileError::Kind::io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw MapFileError(MapFileError::Kind::io, "write failed: " + path.string());
}

ProbMap load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MapFileError(MapFileError::Kind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_map(bytes);
}

VectorMap vector_map_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw MapError("vector map: top level must be an object");
  std::vector<Polyline> lines;
  if (doc.contains("lines")) {
    for (const auto& entry : doc.at("lines")) {
      std::vector<Point2> pts;
      for (const auto& p : entry.at("points")) pts.push_back(point_from_json(p));
      lines.emplace_back(std::move(pts), Frame::map);
    }
  }
  std::vector<Ring> drivable;
  if (doc.contains("drivable")) {
    for (const auto& entry : doc.at("drivable")) {
      Ring ring;
      for (const auto& p : entry.at("ring")) ring.push_back(point_from_json(p));
      drivable.push_back(std::move(ring));
    }
  }
  if (doc.contains("bounds")) {
    const auto& b = doc.at("bounds");
    if (!b.is_array() || b.size() != 4) throw MapError("vector map: bounds must be [xmin, ymin, xmax, ymax]");
    return {std::move(lines), std::move(drivable),
            Bounds{b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()}};
  }
  return {std::move(lines), std::move(drivable)};
}

nlohmann::json vector_map_to_json(const VectorMap& vmap) {
  nlohmann::json doc;
  doc["lines"] = nlohmann::json::array();
  for (const auto& line : vmap.lines()) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Point2& p : line.points()) pts.push_back({p.x, p.y});
    doc["lines"].push_back({{"points", pts}});
  }
  doc["drivable"] = nlohmann::json::array();
  for (const auto& ring : vmap.drivable()) {
    nlohmann::json pts = nlohmann::json::array();
    for (const Point2& p : ring) pts.push_back({p.x, p.y});
    doc["drivable"].push_back({{"ring", pts}});
  }
  const Bounds& b = vmap.bounds();
  doc["bounds"] = {b.xmin, b.ymin, b.xmax, b.ymax};
  return doc;
}

VectorMap load_vector_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MapError("cannot open vector map " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw MapError("malformed vector map JSON in " + path.string() + ": " + e.what());
  }
  try {
    return vector_map_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw MapError("invalid vector map " + path.string() + ": " + e.what());
  } catch (const GeometryError& e) {
    throw MapError("invalid vector map " + path.string() + ": " + e.what());
  }
}

}  // namespace lfloc
