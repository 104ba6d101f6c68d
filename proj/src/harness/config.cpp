#include "lfloc/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lfloc/demo.hpp"

namespace lfloc::harness {

using nlohmann::json;

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  - " + p;
  return msg;
}

const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::straight: return "straight";
    case SegmentKind::arc: return "arc";
    case SegmentKind::reverse: return "reverse";
  }
  return "straight";
}

const char* init_mode_name(InitMode m) { return m == InitMode::uniform ? "uniform" : "gaussian"; }

json pose_json(const Pose& p) { return json::array({p.x(), p.y(), p.theta()}); }

json ring_json(const Ring& ring) {
  json out = json::array();
  for (const Point2& p : ring) out.push_back({p.x, p.y});
  return out;
}

/// Strict reader: collects type errors and unknown keys instead of throwing.
class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) {
      problems_.push_back(path + ": expected an object");
      return false;
    }
    for (const auto& item : j.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; })) {
        problems_.push_back(path + "." + item.key() + ": unknown key");
      }
    }
    return true;
  }

  void number(const json& j, const char* key, const std::string& path, double& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number()) {
      out = v.get<double>();
    } else {
      problems_.push_back(path + "." + key + ": expected a number");
    }
  }

  template <typename U>
  void count(const json& j, const char* key, const std::string& path, U& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) {
      out = v.get<U>();
    } else {
      problems_.push_back(path + "." + key + ": expected a non-negative integer");
    }
  }

  void flag(const json& j, const char* key, const std::string& path, bool& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_boolean()) {
      out = v.get<bool>();
    } else {
      problems_.push_back(path + "." + key + ": expected true or false");
    }
  }

  void text(const json& j, const char* key, const std::string& path, std::string& out) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    if (v.is_string()) {
      out = v.get<std::string>();
    } else {
      problems_.push_back(path + "." + key + ": expected a string");
    }
  }

  std::optional<Point2> point(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      problems_.push_back(path + ": expected [x, y]");
      return std::nullopt;
    }
    return Point2{v[0].get<double>(), v[1].get<double>()};
  }

  std::optional<Pose> pose(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      problems_.push_back(path + ": expected [x, y, theta]");
      return std::nullopt;
    }
    try {
      return Pose{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    } catch (const GeometryError& e) {
      problems_.push_back(path + ": " + e.what());
      return std::nullopt;
    }
  }

  void problem(std::string msg) { problems_.push_back(std::move(msg)); }

 private:
  std::vector<std::string>& problems_;
};

void read_map(Reader& r, const json& j, MapSection& m) {
  if (!r.object(j, "map", {"vector_map", "map_file", "resolution", "sigma_shift", "alpha"})) return;
  r.text(j, "vector_map", "map", m.vector_map);
  r.text(j, "map_file", "map", m.map_file);
  r.number(j, "resolution", "map", m.resolution);
  r.number(j, "sigma_shift", "map", m.sigma_shift);
  r.number(j, "alpha", "map", m.alpha);
}

void read_filter(Reader& r, const json& j, FilterConfig& f) {
  if (!r.object(j, "filter",
                {"particles", "sigma_linear", "sigma_angular", "variant", "ess_gating", "threads"})) {
    return;
  }
  r.count(j, "particles", "filter", f.particles);
  r.number(j, "sigma_linear", "filter", f.motion.sigma_linear);
  r.number(j, "sigma_angular", "filter", f.motion.sigma_angular);
  r.flag(j, "ess_gating", "filter", f.ess_gating);
  r.count(j, "threads", "filter", f.threads);
  std::string variant = variant_name(f.variant);
  r.text(j, "variant", "filter", variant);
  try {
    f.variant = parse_variant(variant);
  } catch (const std::invalid_argument& e) {
    r.problem(std::string("filter.variant: ") + e.what());
  }
}

void read_init(Reader& r, const json& j, InitConfig& init) {
  if (!r.object(j, "init", {"mode", "sigma_x", "sigma_y", "sigma_theta", "pose"})) return;
  std::string mode = init_mode_name(init.mode);
  r.text(j, "mode", "init", mode);
  if (mode == "gaussian") {
    init.mode = InitMode::gaussian;
  } else if (mode == "uniform") {
    init.mode = InitMode::uniform;
  } else {
    r.problem("init.mode: expected gaussian or uniform, got '" + mode + "'");
  }
  r.number(j, "sigma_x", "init", init.sigmas.x);
  r.number(j, "sigma_y", "init", init.sigmas.y);
  r.number(j, "sigma_theta", "init", init.sigmas.theta);
  if (j.contains("pose")) {
    if (j.at("pose").is_null()) {
      init.pose.reset();
    } else if (auto p = r.pose(j.at("pose"), "init.pose")) {
      init.pose = *p;
    }
  }
}

void read_noise(Reader& r, const json& j, DetectionNoise& n) {
  if (!r.object(j, "sim.noise",
                {"sigma_shift_sim", "sigma_angle_sim", "fp_rate", "drop_rate", "lateral_jitter",
                 "per_point_jitter", "fp_min_length", "fp_max_length"})) {
    return;
  }
  r.number(j, "sigma_shift_sim", "sim.noise", n.sigma_shift_sim);
  r.number(j, "sigma_angle_sim", "sim.noise", n.sigma_angle_sim);
  r.number(j, "fp_rate", "sim.noise", n.fp_rate);
  r.number(j, "drop_rate", "sim.noise", n.drop_rate);
  r.flag(j, "lateral_jitter", "sim.noise", n.lateral_jitter);
  r.flag(j, "per_point_jitter", "sim.noise", n.per_point_jitter);
  r.number(j, "fp_min_length", "sim.noise", n.fp_min_length);
  r.number(j, "fp_max_length", "sim.noise", n.fp_max_length);
}

void read_route(Reader& r, const json& j, std::vector<RouteSegment>& route) {
  if (!j.is_array()) {
    r.problem("sim.route: expected an array of segments");
    return;
  }
  route.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "sim.route[" + std::to_string(i) + "]";
    const json& s = j[i];
    if (!r.object(s, path, {"kind", "length", "radius", "speed"})) continue;
    RouteSegment seg;
    std::string kind = "straight";
    r.text(s, "kind", path, kind);
    if (kind == "straight") {
      seg.kind = SegmentKind::straight;
    } else if (kind == "arc") {
      seg.kind = SegmentKind::arc;
    } else if (kind == "reverse") {
      seg.kind = SegmentKind::reverse;
    } else {
      r.problem(path + ".kind: expected straight, arc or reverse");
    }
    r.number(s, "length", path, seg.length);
    r.number(s, "radius", path, seg.radius);
    r.number(s, "speed", path, seg.speed);
    route.push_back(seg);
  }
}

void read_cameras(Reader& r, const json& j, std::vector<CameraFootprint>& cams) {
  if (!j.is_array()) {
    r.problem("sim.cameras: expected an array");
    return;
  }
  cams.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "sim.cameras[" + std::to_string(i) + "]";
    const json& c = j[i];
    if (!r.object(c, path, {"id", "polygon"})) continue;
    CameraFootprint cam;
    if (!c.contains("id") || !c.at("id").is_number_integer()) {
      r.problem(path + ".id: expected an integer");
    } else {
      cam.camera_id = c.at("id").get<int>();
    }
    if (!c.contains("polygon") || !c.at("polygon").is_array()) {
      r.problem(path + ".polygon: expected an array of [x, y]");
    } else {
      const json& poly = c.at("polygon");
      for (std::size_t k = 0; k < poly.size(); ++k) {
        if (auto p = r.point(poly[k], path + ".polygon[" + std::to_string(k) + "]")) {
          cam.polygon.push_back(*p);
        }
      }
    }
    cams.push_back(std::move(cam));
  }
}

void read_sim(Reader& r, const json& j, SimSection& sim) {
  if (!r.object(j, "sim", {"dt", "start", "route", "noise", "odometry", "cameras"})) return;
  r.number(j, "dt", "sim", sim.dt);
  if (j.contains("start")) {
    if (auto p = r.pose(j.at("start"), "sim.start")) sim.start = *p;
  }
  if (j.contains("route")) read_route(r, j.at("route"), sim.route);
  if (j.contains("noise")) read_noise(r, j.at("noise"), sim.noise);
  if (j.contains("odometry")) {
    const json& o = j.at("odometry");
    if (r.object(o, "sim.odometry", {"sigma_linear", "sigma_angular"})) {
      r.number(o, "sigma_linear", "sim.odometry", sim.odometry.sigma_linear);
      r.number(o, "sigma_angular", "sim.odometry", sim.odometry.sigma_angular);
    }
  }
  if (j.contains("cameras")) read_cameras(r, j.at("cameras"), sim.cameras);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

Config::Config() {
  sim.start = demo::route_start();
  sim.route = demo::route();
  sim.cameras = default_cameras();
}

std::vector<std::string> Config::validate() const {
  std::vector<std::string> p;
  auto positive = [&p](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) p.push_back(std::string(name) + " must be positive");
  };
  auto non_negative = [&p](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) p.push_back(std::string(name) + " must be >= 0");
  };
  positive(map.resolution, "map.resolution");
  positive(map.sigma_shift, "map.sigma_shift");
  positive(map.alpha, "map.alpha");
  positive(filter.obs.sigma_angle, "observation.sigma_angle");
  positive(filter.obs.spacing, "observation.spacing");
  if (filter.particles == 0) p.push_back("filter.particles must be >= 1");
  non_negative(filter.motion.sigma_linear, "filter.sigma_linear");
  non_negative(filter.motion.sigma_angular, "filter.sigma_angular");
  if (filter.threads == 0) p.push_back("filter.threads must be >= 1");
  non_negative(init.sigmas.x, "init.sigma_x");
  non_negative(init.sigmas.y, "init.sigma_y");
  non_negative(init.sigmas.theta, "init.sigma_theta");
  positive(sim.dt, "sim.dt");
  if (sim.route.empty()) p.push_back("sim.route must contain at least one segment");
  for (std::size_t i = 0; i < sim.route.size(); ++i) {
    const RouteSegment& s = sim.route[i];
    const std::string at = "sim.route[" + std::to_string(i) + "]";
    if (!(s.length > 0.0)) p.push_back(at + ".length must be positive");
    if (!(s.speed > 0.0)) p.push_back(at + ".speed must be positive");
    if (s.kind == SegmentKind::arc && !(std::abs(s.radius) > 0.0)) {
      p.push_back(at + ".radius must be nonzero for arcs");
    }
  }
  try {
    sim.noise.validate();
  } catch (const std::invalid_argument& e) {
    p.push_back(std::string("sim.noise: ") + e.what());
  }
  non_negative(sim.odometry.sigma_linear, "sim.odometry.sigma_linear");
  non_negative(sim.odometry.sigma_angular, "sim.odometry.sigma_angular");
  std::set<int> ids;
  for (const CameraFootprint& c : sim.cameras) {
    const std::string at = "sim.cameras[id " + std::to_string(c.camera_id) + "]";
    if (!ids.insert(c.camera_id).second) p.push_back(at + ": duplicate camera id");
    if (c.polygon.size() < 3) {
      p.push_back(at + ": polygon needs >= 3 vertices");
    } else if (!is_simple_polygon(c.polygon)) {
      p.push_back(at + ": polygon must be simple");
    }
  }
  if (runs == 0) p.push_back("runs must be >= 1");
  if (workers == 0) p.push_back("workers must be >= 1");
  non_negative(warmup, "warmup");
  if (!(max_degenerate_fraction >= 0.0 && max_degenerate_fraction <= 1.0)) {
    p.push_back("max_degenerate_fraction must be in [0, 1]");
  }
  if (profile_iterations < 500) p.push_back("profile_iterations must be >= 500");
  return p;
}

json to_json(const Config& cfg) {
  json route = json::array();
  for (const RouteSegment& s : cfg.sim.route) {
    route.push_back(
        {{"kind", kind_name(s.kind)}, {"length", s.length}, {"radius", s.radius}, {"speed", s.speed}});
  }
  json cameras = json::array();
  for (const CameraFootprint& c : cfg.sim.cameras) {
    cameras.push_back({{"id", c.camera_id}, {"polygon", ring_json(c.polygon)}});
  }
  const DetectionNoise& n = cfg.sim.noise;
  return {
      {"map",
       {{"vector_map", cfg.map.vector_map},
        {"map_file", cfg.map.map_file},
        {"resolution", cfg.map.resolution},
        {"sigma_shift", cfg.map.sigma_shift},
        {"alpha", cfg.map.alpha}}},
      {"observation",
       {{"sigma_angle", cfg.filter.obs.sigma_angle}, {"spacing", cfg.filter.obs.spacing}}},
      {"filter",
       {{"particles", cfg.filter.particles},
        {"sigma_linear", cfg.filter.motion.sigma_linear},
        {"sigma_angular", cfg.filter.motion.sigma_angular},
        {"variant", variant_name(cfg.filter.variant)},
        {"ess_gating", cfg.filter.ess_gating},
        {"threads", cfg.filter.threads}}},
      {"init",
       {{"mode", init_mode_name(cfg.init.mode)},
        {"sigma_x", cfg.init.sigmas.x},
        {"sigma_y", cfg.init.sigmas.y},
        {"sigma_theta", cfg.init.sigmas.theta},
        {"pose", cfg.init.pose ? pose_json(*cfg.init.pose) : json(nullptr)}}},
      {"sim",
       {{"dt", cfg.sim.dt},
        {"start", pose_json(cfg.sim.start)},
        {"route", route},
        {"noise",
         {{"sigma_shift_sim", n.sigma_shift_sim},
          {"sigma_angle_sim", n.sigma_angle_sim},
          {"fp_rate", n.fp_rate},
          {"drop_rate", n.drop_rate},
          {"lateral_jitter", n.lateral_jitter},
          {"per_point_jitter", n.per_point_jitter},
          {"fp_min_length", n.fp_min_length},
          {"fp_max_length", n.fp_max_length}}},
        {"odometry",
         {{"sigma_linear", cfg.sim.odometry.sigma_linear},
          {"sigma_angular", cfg.sim.odometry.sigma_angular}}},
        {"cameras", cameras}}},
      {"seed", cfg.seed},
      {"runs", cfg.runs},
      {"workers", cfg.workers},
      {"log_timings", cfg.log_timings},
      {"warmup", cfg.warmup},
      {"max_degenerate_fraction", cfg.max_degenerate_fraction},
      {"profile_iterations", cfg.profile_iterations},
  };
}

Config config_from_json(const json& doc) {
  Config cfg;
  std::vector<std::string> problems;
  Reader r(problems);
  if (r.object(doc, "config",
               {"map", "observation", "filter", "init", "sim", "seed", "runs", "workers",
                "log_timings", "warmup", "max_degenerate_fraction", "profile_iterations"})) {
    if (doc.contains("map")) read_map(r, doc.at("map"), cfg.map);
    if (doc.contains("observation")) {
      const json& o = doc.at("observation");
      if (r.object(o, "observation", {"sigma_angle", "spacing"})) {
        r.number(o, "sigma_angle", "observation", cfg.filter.obs.sigma_angle);
        r.number(o, "spacing", "observation", cfg.filter.obs.spacing);
      }
    }
    if (doc.contains("filter")) read_filter(r, doc.at("filter"), cfg.filter);
    if (doc.contains("init")) read_init(r, doc.at("init"), cfg.init);
    if (doc.contains("sim")) read_sim(r, doc.at("sim"), cfg.sim);
    r.count(doc, "seed", "config", cfg.seed);
    r.count(doc, "runs", "config", cfg.runs);
    r.count(doc, "workers", "config", cfg.workers);
    r.flag(doc, "log_timings", "config", cfg.log_timings);
    r.number(doc, "warmup", "config", cfg.warmup);
    r.number(doc, "max_degenerate_fraction", "config", cfg.max_degenerate_fraction);
    r.count(doc, "profile_iterations", "config", cfg.profile_iterations);
  }
  if (problems.empty()) problems = cfg.validate();
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError({"--set expects key=value, got '" + assignment + "'"});
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::string& name = path[i];
    if (name.empty()) throw ConfigError({"--set: empty path component in '" + key + "'"});
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(name);
      } catch (const std::exception&) {
        throw ConfigError({"--set: '" + name + "' is not an array index in '" + key + "'"});
      }
      if (idx >= node->size()) {
        throw ConfigError({"--set: index " + name + " out of range in '" + key + "'"});
      }
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        throw ConfigError({"--set: '" + key + "' descends into a non-object value"});
      }
      next = &(*node)[name];
    }
    node = next;
  }
  *node = std::move(value);
}

Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc;
  if (path.empty()) {
    doc = to_json(Config{});
  } else {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file " + path.string()});
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError({"config file " + path.string() + " is not valid JSON"});
  }
  for (const std::string& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace lfloc::harness
