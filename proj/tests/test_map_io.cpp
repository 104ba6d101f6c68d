#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "lfloc/demo.hpp"
#include "lfloc/map_io.hpp"

using namespace lfloc;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kVersionOffset = 4;
constexpr std::size_t kWidthOffset = 6;
constexpr std::size_t kCountOffset = 54;
constexpr std::size_t kFirstChannelOffset = 55;

ProbMap small_map() {
  const VectorMap vmap({Polyline({{0.0, 0.0}, {2.0, 1.0}, {3.0, 3.0}}, Frame::map)},
                       {{{-0.5, -0.5}, {3.5, -0.5}, {3.5, 3.5}, {-0.5, 3.5}}});
  return compile(vmap, MapMeta::covering(vmap.bounds(), 0.1), 0.25, 8.0);
}

MapFileError::Kind decode_error_kind(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_map(bytes);
  } catch (const MapFileError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode_map accepted corrupt input";
  return MapFileError::Kind::io;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("lfloc_test_" + name); }

}  // namespace

TEST(MapFile, HeaderLayout) {
  const ProbMap pm = small_map();
  const auto bytes = encode_map(pm);
  ASSERT_EQ(std::memcmp(bytes.data(), "LFM1", 4), 0);
  EXPECT_EQ(bytes[kVersionOffset], 1);
  EXPECT_EQ(bytes[kVersionOffset + 1], 0);
  std::uint32_t width = 0;
  for (int i = 0; i < 4; ++i) width |= static_cast<std::uint32_t>(bytes[kWidthOffset + i]) << (8 * i);
  EXPECT_EQ(width, pm.meta().width);
  EXPECT_EQ(bytes[kCountOffset], 4);
  EXPECT_EQ(bytes[kFirstChannelOffset], 1);
  const std::size_t pixels = static_cast<std::size_t>(pm.meta().width) * pm.meta().height;
  EXPECT_EQ(bytes.size(), kFirstChannelOffset + 4 * (1 + 4 * pixels));
}

TEST(MapFile, RoundTripIsIdentity) {
  const ProbMap pm = small_map();
  const auto bytes = encode_map(pm);
  const ProbMap back = decode_map(bytes);
  EXPECT_EQ(back, pm);
  EXPECT_EQ(encode_map(back), bytes);
}

TEST(MapFile, SaveLoadDemoMap) {
  const VectorMap vmap = demo::vector_map();
  const ProbMap pm = compile(vmap, MapMeta::covering(vmap.bounds(), 0.1), 0.2, 10.0);
  const fs::path path = temp_path("demo.lfm");
  save_map(pm, path);
  const ProbMap back = load_map(path);
  EXPECT_EQ(back, pm);
  EXPECT_EQ(encode_map(back), encode_map(pm));
  fs::remove(path);
}

TEST(MapFile, BadMagic) {
  auto bytes = encode_map(small_map());
  std::memcpy(bytes.data(), "XXXX", 4);
  EXPECT_EQ(decode_error_kind(bytes), MapFileError::Kind::bad_magic);
}

TEST(MapFile, Truncated) {
  const auto bytes = encode_map(small_map());
  for (std::size_t keep : {std::size_t{2}, std::size_t{20}, kFirstChannelOffset + 10, bytes.size() - 1}) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(keep));
    EXPECT_EQ(decode_error_kind(cut), MapFileError::Kind::truncated) << keep << " bytes";
  }
}

TEST(MapFile, VersionMismatch) {
  auto bytes = encode_map(small_map());
  bytes[kVersionOffset] = 2;
  EXPECT_EQ(decode_error_kind(bytes), MapFileError::Kind::version_mismatch);
}

TEST(MapFile, UnknownChannel) {
  auto bytes = encode_map(small_map());
  bytes[kFirstChannelOffset] = 9;
  EXPECT_EQ(decode_error_kind(bytes), MapFileError::Kind::unknown_channel);
}

TEST(MapFile, MissingChannel) {
  auto bytes = encode_map(small_map());
  bytes[kCountOffset] = 3;
  bytes.resize(bytes.size() - (bytes.size() - kFirstChannelOffset) / 4);
  EXPECT_EQ(decode_error_kind(bytes), MapFileError::Kind::missing_channel);
}

TEST(MapFile, MissingFile) {
  try {
    load_map(temp_path("does_not_exist.lfm"));
    FAIL();
  } catch (const MapFileError& e) {
    EXPECT_EQ(e.kind(), MapFileError::Kind::io);
  }
}

TEST(VectorMapJson, RoundTrip) {
  const VectorMap vmap = demo::vector_map();
  const VectorMap back = vector_map_from_json(vector_map_to_json(vmap));
  EXPECT_EQ(back.lines(), vmap.lines());
  EXPECT_EQ(back.drivable(), vmap.drivable());
  EXPECT_EQ(back.bounds(), vmap.bounds());
}

TEST(VectorMapJson, BoundsOptional) {
  const auto doc = nlohmann::json::parse(R"({"lines": [{"points": [[0, 0], [4, 2]]}]})");
  const VectorMap vmap = vector_map_from_json(doc);
  ASSERT_EQ(vmap.lines().size(), 1U);
  EXPECT_TRUE(vmap.drivable().empty());
  EXPECT_TRUE(vmap.bounds().contains({4.0, 2.0}));
}

TEST(VectorMapJson, MalformedInput) {
  EXPECT_THROW(vector_map_from_json(nlohmann::json::array()), MapError);
  EXPECT_THROW(vector_map_from_json(nlohmann::json::parse(R"({"lines": [{"points": [[0]]}]})")), MapError);
  EXPECT_THROW(vector_map_from_json(nlohmann::json::parse(R"({"bounds": [0, 0, 1]})")), MapError);

  const fs::path path = temp_path("broken.json");
  std::ofstream(path) << "{\"lines\": [";
  EXPECT_THROW(load_vector_map(path), MapError);
  fs::remove(path);
}
