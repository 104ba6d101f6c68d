#ifndef LFLOC_HARNESS_CONFIG_HPP
#define LFLOC_HARNESS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lfloc/filter.hpp"
#include "lfloc/simulator.hpp"

namespace lfloc::harness {

/// Invalid configuration; `problems` lists every violation found.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  [[nodiscard]] const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct MapSection {
  std::string vector_map;  // JSON vector map; empty selects the built-in demo map
  std::string map_file;    // compiled raster; empty compiles from vector_map
  double resolution = 0.05;
  double sigma_shift = 0.2;
  double alpha = 10.0;
};

struct SimSection {
  double dt = 0.1;
  Pose start;
  std::vector<RouteSegment> route;
  DetectionNoise noise;
  MotionNoise odometry;
  std::vector<CameraFootprint> cameras;
};

/// Defaults suit the bundled demo map.
struct Config {
  MapSection map;
  FilterConfig filter;  // includes the observation parameters
  InitConfig init;
  SimSection sim;
  std::uint64_t seed = 1;
  std::size_t runs = 10;
  unsigned workers = 1;
  bool log_timings = false;
  double warmup = 5.0;  // s excluded from metrics and degeneracy checks
  double max_degenerate_fraction = 0.05;  // of post-warmup steps, before exit code 4
  std::size_t profile_iterations = 500;

  Config();

  /// Empty when the configuration is usable.
  [[nodiscard]] std::vector<std::string> validate() const;
};

nlohmann::json to_json(const Config& cfg);
/// Unknown keys and type mismatches are reported as ConfigError. Missing keys
/// keep their defaults.
Config config_from_json(const nlohmann::json& doc);

/// Applies `key.path=value`; the value is parsed as JSON and falls back to a
/// plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads `path` (or the defaults when empty), applies overrides, validates.
Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

}  // namespace lfloc::harness

#endif  // LFLOC_HARNESS_CONFIG_HPP
