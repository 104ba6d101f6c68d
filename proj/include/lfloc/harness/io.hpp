#ifndef LFLOC_HARNESS_IO_HPP
#define LFLOC_HARNESS_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfloc/simulator.hpp"

namespace lfloc::harness {

/// Unreadable or malformed input/output file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kRunLogHeader =
    "t,truth_x,truth_y,truth_theta,est_x,est_y,est_theta,e_lon,e_lat,e_ang,"
    "ms_total,ms_shift,ms_angular,ms_transform,ms_resample,degenerate_flag";

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Header, then `# config: <json>` when `config_line` is non-empty, then one
/// row per step. Timing columns are written as 0 unless `timings` is set, so
/// that repeated runs produce identical bytes.
void write_runlog(std::ostream& os, const RunLog& log, const std::string& config_line, bool timings);
void write_runlog(const std::filesystem::path& path, const RunLog& log,
                  const std::string& config_line, bool timings);

struct RunLogFile {
  RunLog log;
  std::string config_line;  // empty when the file has none
};

RunLogFile read_runlog(std::istream& is, const std::string& source = "<stream>");
RunLogFile read_runlog(const std::filesystem::path& path);

/// One JSON object per frame: t, odom, cameras and, when known, truth.
void write_detections(std::ostream& os, const std::vector<SensorFrame>& frames);
void write_detections(const std::filesystem::path& path, const std::vector<SensorFrame>& frames);

/// Camera entries whose id is not in `known_cameras` are dropped with a
/// warning on `warn`; the frame's odometry is kept. Malformed lines throw
/// FormatError naming the line number. Blank lines are ignored.
std::vector<SensorFrame> read_detections(std::istream& is, const std::set<int>& known_cameras,
                                         std::ostream& warn, const std::string& source = "<stream>");
std::vector<SensorFrame> read_detections(const std::filesystem::path& path,
                                         const std::set<int>& known_cameras, std::ostream& warn);

}  // namespace lfloc::harness

#endif  // LFLOC_HARNESS_IO_HPP
