#ifndef LFLOC_HARNESS_COMMANDS_HPP
#define LFLOC_HARNESS_COMMANDS_HPP

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lfloc/harness/config.hpp"
#include "lfloc/harness/metrics.hpp"

namespace lfloc::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitDegenerate = 4,
};

/// The configured vector map, or the built-in demo map when none is set.
VectorMap resolve_vector_map(const Config& cfg);
/// Loads `map.map_file` when set, otherwise compiles the vector map.
ProbMap resolve_prob_map(const Config& cfg, const VectorMap& vmap);

/// Compiles the vector map and writes the raster file; prints per-channel stats.
int cmd_build_map(const Config& cfg, const std::filesystem::path& out_file, std::ostream& os);

/// Runs `cfg.runs` closed-loop runs with seeds seed, seed+1, ... and writes
/// run_NNN.csv and detections_NNN.jsonl into `out_dir`. Each CSV embeds the
/// configuration of its own run (runs = 1, seed = its seed).
int cmd_simulate(const Config& cfg, const std::filesystem::path& out_dir, std::ostream& os);

/// Replays a detections file through the filter and writes one run log.
int cmd_localize(const Config& cfg, const std::filesystem::path& detections,
                 const std::filesystem::path& out_csv, std::ostream& os, std::ostream& warn);

/// Aggregates run logs per model variant (taken from each file's embedded
/// configuration); the combined model, when present, is the reference row.
MetricsTable evaluate_runlogs(const std::vector<std::filesystem::path>& runlogs, double warmup);
int cmd_evaluate(const std::vector<std::filesystem::path>& runlogs, double warmup,
                 const std::filesystem::path& out_dir, std::ostream& os);

/// Single-threaded filter iterations over the simulated route.
TimingReport profile(const Config& cfg, const ProbMap& pmap, const VectorMap& vmap);
int cmd_profile(const Config& cfg, std::ostream& os);

}  // namespace lfloc::harness

#endif  // LFLOC_HARNESS_COMMANDS_HPP
