#include "lfloc/harness/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace lfloc::harness {

using nlohmann::json;

namespace {

constexpr const char* kConfigPrefix = "# config: ";
constexpr std::size_t kColumns = 16;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_cell(const std::string& cell, const std::string& where) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw FormatError(where + ": '" + cell + "' is not a number");
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write " + path.string());
  return os;
}

Polyline parse_line(const json& pts, const std::string& where) {
  if (!pts.is_array()) throw FormatError(where + ": a line must be an array of [x, y]");
  std::vector<Point2> points;
  for (const json& p : pts) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw FormatError(where + ": a point must be [x, y]");
    }
    points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  try {
    return {std::move(points), Frame::vehicle};
  } catch (const GeometryError& e) {
    throw FormatError(where + ": " + e.what());
  }
}

std::array<double, 3> parse_triple(const json& v, const char* name, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw FormatError(where + ": '" + name + "' must have 3 numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw FormatError(where + ": '" + name + "' must have 3 numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

void write_runlog(std::ostream& os, const RunLog& log, const std::string& config_line, bool timings) {
  os << kRunLogHeader << '\n';
  if (!config_line.empty()) os << kConfigPrefix << config_line << '\n';
  for (const RunRow& r : log.rows) {
    os << format_double(r.t) << ',';
    if (r.truth) {
      os << format_double(r.truth->x()) << ',' << format_double(r.truth->y()) << ','
         << format_double(r.truth->theta()) << ',';
    } else {
      os << ",,,";
    }
    os << format_double(r.estimate.x()) << ',' << format_double(r.estimate.y()) << ','
       << format_double(r.estimate.theta()) << ',';
    if (r.error) {
      os << format_double(r.error->longitudinal) << ',' << format_double(r.error->lateral) << ','
         << format_double(r.error->angular) << ',';
    } else {
      os << ",,,";
    }
    const StepTimings t = timings ? r.timings : StepTimings{};
    os << format_double(t.total_ms) << ',' << format_double(t.shift_ms) << ','
       << format_double(t.angular_ms) << ',' << format_double(t.transform_ms) << ','
       << format_double(t.resample_ms) << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
}

void write_runlog(const std::filesystem::path& path, const RunLog& log,
                  const std::string& config_line, bool timings) {
  auto os = open_out(path);
  write_runlog(os, log, config_line, timings);
  if (!os) throw FormatError("failed writing " + path.string());
}

RunLogFile read_runlog(std::istream& is, const std::string& source) {
  RunLogFile out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    if (line.rfind('#', 0) == 0) {
      if (line.rfind(kConfigPrefix, 0) == 0) out.config_line = line.substr(std::string(kConfigPrefix).size());
      continue;
    }
    if (!header_seen) {
      if (line != kRunLogHeader) throw FormatError(where + ": unexpected run log header");
      header_seen = true;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != kColumns) {
      throw FormatError(where + ": expected " + std::to_string(kColumns) + " columns, got " +
                        std::to_string(cells.size()));
    }
    std::array<std::optional<double>, kColumns> v;
    for (std::size_t i = 0; i < kColumns; ++i) v[i] = parse_cell(cells[i], where);
    for (std::size_t i : {0, 4, 5, 6}) {
      if (!v[i]) throw FormatError(where + ": time and estimate columns are required");
    }
    RunRow row;
    row.t = *v[0];
    try {
      if (v[1] && v[2] && v[3]) row.truth = Pose{*v[1], *v[2], *v[3]};
      row.estimate = Pose{*v[4], *v[5], *v[6]};
    } catch (const GeometryError& e) {
      throw FormatError(where + ": " + e.what());
    }
    if (v[7] && v[8] && v[9]) row.error = PoseError{*v[7], *v[8], *v[9]};
    row.timings.total_ms = v[10].value_or(0.0);
    row.timings.shift_ms = v[11].value_or(0.0);
    row.timings.angular_ms = v[12].value_or(0.0);
    row.timings.transform_ms = v[13].value_or(0.0);
    row.timings.resample_ms = v[14].value_or(0.0);
    row.degenerate = v[15].value_or(0.0) != 0.0;
    out.log.rows.push_back(row);
  }
  if (!header_seen) throw FormatError(source + ": missing run log header");
  return out;
}

RunLogFile read_runlog(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  return read_runlog(is, path.string());
}

void write_detections(std::ostream& os, const std::vector<SensorFrame>& frames) {
  for (const SensorFrame& f : frames) {
    json cams = json::array();
    for (const CameraLines& c : f.z.cameras()) {
      json lines = json::array();
      for (const Polyline& l : c.lines) {
        json pts = json::array();
        for (const Point2& p : l.points()) pts.push_back({p.x, p.y});
        lines.push_back(std::move(pts));
      }
      cams.push_back({{"id", c.camera_id}, {"lines", std::move(lines)}});
    }
    json obj = {{"t", f.t}, {"odom", {f.odom.dx, f.odom.dy, f.odom.dtheta}}, {"cameras", cams}};
    if (f.truth) obj["truth"] = {f.truth->x(), f.truth->y(), f.truth->theta()};
    os << obj.dump() << '\n';
  }
}

void write_detections(const std::filesystem::path& path, const std::vector<SensorFrame>& frames) {
  auto os = open_out(path);
  write_detections(os, frames);
  if (!os) throw FormatError("failed writing " + path.string());
}

std::vector<SensorFrame> read_detections(std::istream& is, const std::set<int>& known_cameras,
                                         std::ostream& warn, const std::string& source) {
  std::vector<SensorFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw FormatError(where + ": not a JSON object");
    if (!obj.contains("t") || !obj.at("t").is_number()) throw FormatError(where + ": missing number 't'");
    if (!obj.contains("odom")) throw FormatError(where + ": missing 'odom'");
    if (!obj.contains("cameras") || !obj.at("cameras").is_array()) {
      throw FormatError(where + ": missing array 'cameras'");
    }
    SensorFrame f;
    f.t = obj.at("t").get<double>();
    if (!frames.empty() && !(f.t > frames.back().t)) {
      throw FormatError(where + ": frame times must increase");
    }
    const auto odom = parse_triple(obj.at("odom"), "odom", where);
    f.odom = {odom[0], odom[1], odom[2]};
    if (obj.contains("truth")) {
      const auto tr = parse_triple(obj.at("truth"), "truth", where);
      f.truth = Pose{tr[0], tr[1], tr[2]};
    }
    std::vector<CameraLines> cams;
    std::set<int> seen;
    for (const json& c : obj.at("cameras")) {
      if (!c.is_object() || !c.contains("id") || !c.at("id").is_number_integer() ||
          !c.contains("lines") || !c.at("lines").is_array()) {
        throw FormatError(where + ": a camera needs integer 'id' and array 'lines'");
      }
      const int id = c.at("id").get<int>();
      if (!seen.insert(id).second) throw FormatError(where + ": duplicate camera id " + std::to_string(id));
      if (known_cameras.count(id) == 0) {
        warn << "warning: " << where << ": unknown camera id " << id << ", detections skipped\n";
        continue;
      }
      CameraLines cl{id, {}};
      for (const json& l : c.at("lines")) cl.lines.push_back(parse_line(l, where));
      cams.push_back(std::move(cl));
    }
    f.z = Measurement(std::move(cams));
    frames.push_back(std::move(f));
  }
  return frames;
}

std::vector<SensorFrame> read_detections(const std::filesystem::path& path,
                                         const std::set<int>& known_cameras, std::ostream& warn) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot read " + path.string());
  return read_detections(is, known_cameras, warn, path.string());
}

}  // namespace lfloc::harness
