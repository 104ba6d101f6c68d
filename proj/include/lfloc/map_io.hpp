#ifndef LFLOC_MAP_IO_HPP
#define LFLOC_MAP_IO_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfloc/map.hpp"

namespace lfloc {

/// Failure reading or writing an LFM1 map file. `kind()` tells the cases apart.
class MapFileError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, truncated, version_mismatch, unknown_channel, missing_channel };

  MapFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::uint16_t kMapFormatVersion = 1;

/// Little-endian LFM1 encoding: header, then one (id, width*height f32) block per channel.
std::vector<std::uint8_t> encode_map(const ProbMap& pmap);
ProbMap decode_map(const std::vector<std::uint8_t>& bytes);

void save_map(const ProbMap& pmap, const std::filesystem::path& path);
ProbMap load_map(const std::filesystem::path& path);

/// {"lines": [{"points": [[x, y], ...]}], "drivable": [{"ring": [[x, y], ...]}], "bounds": [...]}
VectorMap vector_map_from_json(const nlohmann::json& doc);
nlohmann::json vector_map_to_json(const VectorMap& vmap);
VectorMap load_vector_map(const std::filesystem::path& path);

}  // namespace lfloc

#endif  // LFLOC_MAP_IO_HPP
