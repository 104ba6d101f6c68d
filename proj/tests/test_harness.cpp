#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lfloc/demo.hpp"
#include "lfloc/harness/commands.hpp"
#include "lfloc/harness/io.hpp"
#include "lfloc/map_io.hpp"

using namespace lfloc;
using namespace lfloc::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lfloc_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A short, cheap version of the demo experiment.
Config small_config() {
  Config cfg;
  cfg.map.resolution = 0.1;
  cfg.filter.particles = 150;
  cfg.sim.route.resize(2);
  cfg.sim.dt = 0.2;
  cfg.runs = 2;
  cfg.warmup = 1.0;
  return cfg;
}

RunRow row(double t, double lat, double lon, double ang) {
  RunRow r;
  r.t = t;
  r.truth = Pose(0.0, 0.0, 0.0);
  r.estimate = Pose(lon, lat, ang);
  r.error = PoseError{lon, lat, ang};
  return r;
}

}  // namespace

TEST(Config, DefaultsMatchDocumentedValues) {
  const Config cfg;
  EXPECT_EQ(cfg.map.sigma_shift, 0.2);
  EXPECT_EQ(cfg.map.alpha, 10.0);
  EXPECT_EQ(cfg.map.resolution, 0.05);
  EXPECT_EQ(cfg.filter.obs.sigma_angle, 0.1);
  EXPECT_EQ(cfg.filter.obs.spacing, 0.5);
  EXPECT_EQ(cfg.filter.particles, 1000U);
  EXPECT_EQ(cfg.filter.motion.sigma_linear, 0.05);
  EXPECT_EQ(cfg.filter.motion.sigma_angular, 0.05);
  EXPECT_EQ(cfg.filter.variant, ModelVariant::combined);
  EXPECT_FALSE(cfg.filter.ess_gating);
  EXPECT_EQ(cfg.runs, 10U);
  EXPECT_EQ(cfg.init.mode, InitMode::gaussian);
  EXPECT_EQ(cfg.sim.cameras.size(), 4U);
  EXPECT_TRUE(cfg.validate().empty());
}

TEST(Config, JsonRoundTrip) {
  Config cfg = small_config();
  cfg.filter.variant = ModelVariant::angular;
  cfg.init.mode = InitMode::uniform;
  cfg.init.pose = Pose(1.0, -2.0, 0.3);
  cfg.sim.noise.per_point_jitter = false;
  cfg.seed = 123456789012345ULL;
  const nlohmann::json doc = to_json(cfg);
  const Config back = config_from_json(doc);
  EXPECT_EQ(to_json(back), doc);
  EXPECT_EQ(config_from_json(nlohmann::json::parse(doc.dump())).seed, cfg.seed);
}

TEST(Config, MissingKeysKeepDefaults) {
  const Config cfg = config_from_json(nlohmann::json::parse(R"({"filter": {"particles": 50}})"));
  EXPECT_EQ(cfg.filter.particles, 50U);
  EXPECT_EQ(cfg.map.sigma_shift, 0.2);
  EXPECT_EQ(cfg.runs, 10U);
}

TEST(Config, Overrides) {
  nlohmann::json doc = to_json(Config{});
  apply_override(doc, "filter.particles=250");
  apply_override(doc, "filter.variant=shift");
  apply_override(doc, "observation.sigma_angle=0.3");
  apply_override(doc, "sim.noise.lateral_jitter=false");
  const Config cfg = config_from_json(doc);
  EXPECT_EQ(cfg.filter.particles, 250U);
  EXPECT_EQ(cfg.filter.variant, ModelVariant::shift);
  EXPECT_EQ(cfg.filter.obs.sigma_angle, 0.3);
  EXPECT_FALSE(cfg.sim.noise.lateral_jitter);
  EXPECT_ANY_THROW(apply_override(doc, "no_equals_sign"));
}

TEST(Config, LoadWithOverrides) {
  const fs::path path = scratch("cfg.json");
  std::ofstream(path) << R"({"seed": 7, "runs": 3})";
  const Config cfg = load_config(path, {"seed=9"});
  EXPECT_EQ(cfg.seed, 9U);
  EXPECT_EQ(cfg.runs, 3U);
  fs::remove(path);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"particels": 10})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"filter": {"particles": "many"}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"filter": {"variant": "lidar"}})")), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"init": {"mode": "everywhere"}})")), ConfigError);
}

TEST(Config, ValidationListsEveryProblem) {
  Config cfg;
  cfg.filter.particles = 0;
  cfg.map.alpha = -1.0;
  cfg.filter.obs.sigma_angle = 0.0;
  const auto problems = cfg.validate();
  EXPECT_GE(problems.size(), 3U);
  try {
    load_config({}, {"filter.particles=0", "observation.spacing=-1"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_GE(e.problems().size(), 2U);
  }
}

TEST(RunLogCsv, RoundTrip) {
  RunLog log;
  log.rows.push_back(row(0.0, 0.1, -0.2, 0.01));
  log.rows.push_back(row(0.1, 1.0 / 3.0, 2e-17, -std::numbers::pi / 7.0));
  RunRow blind;
  blind.t = 0.2;
  blind.estimate = Pose(5.0, 6.0, 1.0);
  blind.degenerate = true;
  log.rows.push_back(blind);

  std::stringstream ss;
  write_runlog(ss, log, R"({"filter": {"variant": "shift"}})", false);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), kRunLogHeader);

  const RunLogFile back = read_runlog(ss);
  EXPECT_EQ(back.config_line, R"({"filter": {"variant": "shift"}})");
  ASSERT_EQ(back.log.rows.size(), 3U);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.log.rows[i].t, log.rows[i].t);
    EXPECT_EQ(back.log.rows[i].estimate, log.rows[i].estimate);
    EXPECT_EQ(back.log.rows[i].degenerate, log.rows[i].degenerate);
    EXPECT_EQ(back.log.rows[i].error.has_value(), log.rows[i].error.has_value());
  }
  EXPECT_EQ(back.log.rows[1].error->lateral, 1.0 / 3.0);
  EXPECT_FALSE(back.log.rows[2].truth.has_value());
}

TEST(RunLogCsv, FormatDoubleRoundTrips) {
  for (double v : {0.0, 0.1, 1.0 / 3.0, -1e-300, 6.02214076e23, std::numbers::pi}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(RunLogCsv, MalformedInput) {
  std::istringstream bad_header("t,x\n1,2\n");
  EXPECT_THROW(read_runlog(bad_header), FormatError);
  std::istringstream bad_row(std::string(kRunLogHeader) + "\n0,1,2\n");
  EXPECT_THROW(read_runlog(bad_row), FormatError);
  EXPECT_THROW(read_runlog(scratch("missing.csv")), FormatError);
}

TEST(Detections, RoundTrip) {
  const auto traj = make_trajectory(demo::route(), demo::route_start(), 1.0);
  const Trajectory part(traj.begin(), traj.begin() + 6);
  const auto frames = simulate_frames(demo::vector_map(), part, default_cameras(), DetectionNoise{},
                                      MotionNoise{}, 0.5, 4);
  std::stringstream ss;
  write_detections(ss, frames);
  std::ostringstream warn;
  const auto back = read_detections(ss, {0, 1, 2, 3}, warn);
  EXPECT_TRUE(warn.str().empty());
  ASSERT_EQ(back.size(), frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    EXPECT_EQ(back[k].t, frames[k].t);
    EXPECT_EQ(back[k].odom.dx, frames[k].odom.dx);
    EXPECT_EQ(back[k].odom.dtheta, frames[k].odom.dtheta);
    EXPECT_EQ(back[k].truth, frames[k].truth);
    ASSERT_EQ(back[k].z.cameras().size(), frames[k].z.cameras().size());
    for (std::size_t c = 0; c < frames[k].z.cameras().size(); ++c) {
      const auto& a = back[k].z.cameras()[c].lines;
      const auto& b = frames[k].z.cameras()[c].lines;
      ASSERT_EQ(a.size(), b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(std::equal(a[i].points().begin(), a[i].points().end(), b[i].points().begin(),
                               b[i].points().end()));
      }
    }
  }
}

TEST(Detections, UnknownCameraWarnsAndKeepsOdometry) {
  std::istringstream in(
      R"({"t": 0.0, "odom": [0, 0, 0], "cameras": [{"id": 0, "lines": [[[1, 0], [2, 0]]]}]})"
      "\n\n"
      R"({"t": 0.1, "odom": [0.5, 0, 0.01], "cameras": [{"id": 9, "lines": [[[1, 0], [2, 0]]]}]})"
      "\n");
  std::ostringstream warn;
  const auto frames = read_detections(in, {0}, warn);
  ASSERT_EQ(frames.size(), 2U);
  EXPECT_EQ(frames[0].z.line_count(), 1U);
  EXPECT_EQ(frames[1].z.line_count(), 0U);
  EXPECT_EQ(frames[1].odom.dx, 0.5);
  EXPECT_FALSE(frames[1].truth.has_value());
  EXPECT_NE(warn.str().find('9'), std::string::npos);
}

TEST(Detections, CorruptLineNamesLineNumber) {
  std::istringstream in(
      R"({"t": 0.0, "odom": [0, 0, 0], "cameras": []})"
      "\n"
      R"({"t": 0.1, "odom": [0, 0], "cameras": []})"
      "\n");
  std::ostringstream warn;
  try {
    read_detections(in, {0}, warn, "det.jsonl");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("det.jsonl:2"), std::string::npos) << e.what();
  }
  std::istringstream garbage("{not json\n");
  EXPECT_THROW(read_detections(garbage, {0}, warn), FormatError);
}

TEST(Metrics, ConstantLateralError) {
  RunLog log;
  for (int k = 0; k < 5; ++k) log.rows.push_back(row(k, 0.5, 0.0, 0.0));
  const ErrorSummary s = summarize(std::span(&log, 1), 0.0);
  EXPECT_EQ(s.lateral.max, 0.5);
  EXPECT_EQ(s.lateral.mae, 0.5);
  EXPECT_EQ(s.lateral.std, 0.0);
}

TEST(Metrics, ThreeRowFixture) {
  RunLog log;
  log.rows.push_back(row(0.0, 0.1, -1.0, 0.02));
  log.rows.push_back(row(1.0, -0.4, 2.0, -0.01));
  log.rows.push_back(row(2.0, 0.4, -0.5, 0.03));
  const ErrorSummary s = summarize(std::span(&log, 1), 0.0);
  // |lat| = 0.1, 0.4, 0.4 -> mean 0.3, deviations -0.2, 0.1, 0.1
  EXPECT_DOUBLE_EQ(s.lateral.max, 0.4);
  EXPECT_DOUBLE_EQ(s.lateral.mae, 0.3);
  EXPECT_NEAR(s.lateral.std, std::sqrt(0.06 / 3.0), 1e-15);
  // |lon| = 1, 2, 0.5 -> mean 7/6
  EXPECT_DOUBLE_EQ(s.longitudinal.max, 2.0);
  EXPECT_DOUBLE_EQ(s.longitudinal.mae, 3.5 / 3.0);
  const double m = 3.5 / 3.0;
  EXPECT_NEAR(s.longitudinal.std, std::sqrt(((1 - m) * (1 - m) + (2 - m) * (2 - m) + (0.5 - m) * (0.5 - m)) / 3.0),
              1e-15);
  EXPECT_DOUBLE_EQ(s.angular.max, 0.03);
  EXPECT_DOUBLE_EQ(s.angular.mae, 0.02);
}

TEST(Metrics, WarmupExcludesEarlyRows) {
  RunLog log;
  log.rows.push_back(row(0.0, 9.0, 9.0, 1.0));
  log.rows.push_back(row(5.0, 0.2, 0.1, 0.0));
  log.rows.back().degenerate = true;
  const ErrorSummary s = summarize(std::span(&log, 1), 5.0);
  EXPECT_EQ(s.lateral.count, 1U);
  EXPECT_EQ(s.lateral.max, 0.2);
  EXPECT_EQ(s.degenerate_steps, 1U);
  EXPECT_THROW(summarize(std::span(&log, 1), 10.0), std::invalid_argument);
}

TEST(Metrics, TableLayoutAndDeltas) {
  MetricsTable table;
  ErrorSummary a, b;
  a.longitudinal = {1.0, 0.5, 0.1, 3};
  a.lateral = {0.2, 0.1, 0.01, 3};
  a.angular = {0.02, 0.01, 0.001, 3};
  b.longitudinal = {2.0, 0.4, 0.1, 3};
  b.lateral = {0.1, 0.1, 0.01, 3};
  b.angular = {0.04, 0.02, 0.001, 3};
  table.rows = {{"shift+angular", a}, {"shift", b}};

  EXPECT_EQ(MetricsTable::column_names("deg").size(), 6U);
  EXPECT_NE(MetricsTable::column_names("rad")[4].find("[rad]"), std::string::npos);
  const auto v = table.values(0, "deg");
  ASSERT_EQ(v.size(), 6U);
  EXPECT_NEAR(v[4], 0.02 * 180.0 / std::numbers::pi, 1e-12);

  const auto d = table.delta_percent(0, 1);
  const std::vector<double> expected{-50.0, 25.0, 100.0, 0.0, -50.0, -50.0};
  ASSERT_EQ(d.size(), 6U);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(d[i], expected[i], 1e-9);

  const std::string csv = table.to_csv();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const std::string text = table.to_text();
  EXPECT_NE(text.find("[deg]"), std::string::npos);
  EXPECT_NE(text.find("[rad]"), std::string::npos);
  EXPECT_NE(text.find("delta shift+angular vs shift"), std::string::npos);
}

TEST(Metrics, TimingPercentagesSumTo100) {
  std::vector<StepTimings> steps{{0.5, 1.0, 2.0, 0.3, 4.5}, {0.4, 1.2, 2.1, 0.2, 4.4}, {0.0, 0.0, 0.0, 0.0, 0.0}};
  const TimingReport r = timing_report(steps);
  EXPECT_EQ(r.iterations, 3U);
  EXPECT_NEAR(r.mean_ms, 8.9 / 3.0, 1e-12);
  EXPECT_NEAR(r.transform_pct + r.shift_pct + r.angular_pct + r.resample_pct + r.other_pct, 100.0, 0.5);
  EXPECT_NEAR(r.angular_pct, 100.0 * 4.1 / 8.9, 1e-9);
  EXPECT_GE(r.other_pct, 0.0);
}

TEST(Commands, BuildMapIsDeterministic) {
  Config cfg;
  cfg.map.resolution = 0.1;
  const fs::path dir = scratch("build");
  std::ostringstream out;
  ASSERT_EQ(cmd_build_map(cfg, dir / "a.lfm", out), kExitOk);
  ASSERT_EQ(cmd_build_map(cfg, dir / "b.lfm", out), kExitOk);
  EXPECT_EQ(slurp(dir / "a.lfm"), slurp(dir / "b.lfm"));
  const ProbMap pm = load_map(dir / "a.lfm");
  EXPECT_TRUE(pm.check_invariants().empty());
  EXPECT_NE(out.str().find("shift"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Commands, BuildMapRejectsEmptyLineSet) {
  const fs::path dir = scratch("empty_map");
  fs::create_directories(dir);
  std::ofstream(dir / "empty.json") << R"({"lines": [], "bounds": [0, 0, 10, 10]})";
  Config cfg;
  cfg.map.vector_map = (dir / "empty.json").string();
  std::ostringstream out;
  EXPECT_ANY_THROW(cmd_build_map(cfg, dir / "x.lfm", out));
  fs::remove_all(dir);
}

TEST(Commands, SimulateWritesSeededRunsDeterministically) {
  const Config cfg = small_config();
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  std::ostringstream out;
  ASSERT_EQ(cmd_simulate(cfg, a, out), kExitOk) << out.str();
  ASSERT_EQ(cmd_simulate(cfg, b, out), kExitOk);
  for (const char* name : {"run_000.csv", "run_001.csv", "detections_000.jsonl", "detections_001.jsonl"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_FALSE(fs::exists(a / "run_002.csv"));
  const RunLogFile r0 = read_runlog(a / "run_000.csv");
  const RunLogFile r1 = read_runlog(a / "run_001.csv");
  EXPECT_EQ(config_from_json(nlohmann::json::parse(r0.config_line)).seed, cfg.seed);
  EXPECT_EQ(config_from_json(nlohmann::json::parse(r1.config_line)).seed, cfg.seed + 1);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Commands, StraightRouteReproducedInTruth) {
  Config cfg = small_config();
  cfg.runs = 1;
  cfg.sim.route = {{SegmentKind::straight, 12.0, 0.0, 2.0}};
  cfg.sim.start = demo::route_start();
  const fs::path dir = scratch("straight");
  std::ostringstream out;
  cmd_simulate(cfg, dir, out);
  const RunLogFile f = read_runlog(dir / "run_000.csv");
  ASSERT_EQ(f.log.rows.size(), 31U);
  for (const RunRow& r : f.log.rows) {
    ASSERT_TRUE(r.truth.has_value());
    EXPECT_NEAR(r.truth->x(), cfg.sim.start.x() + 2.0 * r.t, 1e-9);
    EXPECT_NEAR(r.truth->y(), cfg.sim.start.y(), 1e-12);
    EXPECT_EQ(r.truth->theta(), cfg.sim.start.theta());
  }
  fs::remove_all(dir);
}

TEST(Commands, ReplayMatchesSimulation) {
  Config cfg = small_config();
  cfg.runs = 1;
  const fs::path dir = scratch("replay");
  std::ostringstream out, warn;
  cmd_simulate(cfg, dir, out);
  ASSERT_EQ(cmd_localize(cfg, dir / "detections_000.jsonl", dir / "replay.csv", out, warn), kExitOk);
  const RunLogFile sim = read_runlog(dir / "run_000.csv");
  const RunLogFile rep = read_runlog(dir / "replay.csv");
  ASSERT_EQ(sim.log.rows.size(), rep.log.rows.size());
  for (std::size_t k = 0; k < sim.log.rows.size(); ++k) {
    EXPECT_EQ(sim.log.rows[k].estimate, rep.log.rows[k].estimate) << k;
  }
  EXPECT_TRUE(warn.str().empty());
  fs::remove_all(dir);
}

TEST(Commands, EmptyDetectionsDeadReckon) {
  Config cfg = small_config();
  cfg.init.pose = Pose(0.0, 0.0, 0.0);
  const fs::path dir = scratch("dead_reckon");
  fs::create_directories(dir);
  {
    std::ofstream det(dir / "det.jsonl");
    for (int k = 0; k < 10; ++k) {
      det << R"({"t": )" << 0.1 * k << R"(, "odom": [)" << (k == 0 ? 0.0 : 0.5) << R"(, 0, 0], "cameras": []})"
          << '\n';
    }
  }
  std::ostringstream out, warn;
  cmd_localize(cfg, dir / "det.jsonl", dir / "out.csv", out, warn);
  const RunLogFile f = read_runlog(dir / "out.csv");
  ASSERT_EQ(f.log.rows.size(), 10U);
  EXPECT_NEAR(f.log.rows.back().estimate.x(), 4.5, 0.5);
  EXPECT_NEAR(f.log.rows.back().estimate.y(), 0.0, 0.5);
  for (const RunRow& r : f.log.rows) EXPECT_FALSE(r.error.has_value());
  fs::remove_all(dir);
}

TEST(Commands, MismatchedMapRaisesDegeneracy) {
  Config cfg = small_config();
  cfg.runs = 1;
  const fs::path dir = scratch("mismatch");
  std::ostringstream out, warn;
  cmd_simulate(cfg, dir, out);

  // Replay against a map with the same extent but lines elsewhere and no drivable area.
  fs::create_directories(dir);
  const VectorMap demo_map = demo::vector_map();
  const Bounds b = demo_map.bounds();
  const VectorMap other({Polyline({{b.xmin, b.ymin}, {b.xmin + 1.0, b.ymin}}, Frame::map)},
                        {{{b.xmin, b.ymin}, {b.xmin + 1.0, b.ymin}, {b.xmin + 1.0, b.ymin + 1.0}, {b.xmin, b.ymin + 1.0}}},
                        b);
  save_map(compile(other, MapMeta::covering(b, 0.1), 0.2, 10.0), dir / "other.lfm");
  Config replay = cfg;
  replay.map.map_file = (dir / "other.lfm").string();
  const int code = cmd_localize(replay, dir / "detections_000.jsonl", dir / "replay.csv", out, warn);
  EXPECT_EQ(code, kExitDegenerate);
  const RunLogFile f = read_runlog(dir / "replay.csv");
  std::size_t flagged = 0;
  for (const RunRow& r : f.log.rows) flagged += r.degenerate ? 1 : 0;
  EXPECT_GT(flagged, f.log.rows.size() / 2);
  fs::remove_all(dir);
}

TEST(Commands, EvaluateGroupsByVariant) {
  const fs::path dir = scratch("evaluate");
  fs::create_directories(dir);
  RunLog good, bad;
  for (int k = 0; k < 4; ++k) {
    good.rows.push_back(row(k, 0.1, 0.2, 0.01));
    bad.rows.push_back(row(k, 0.3, 0.4, 0.02));
  }
  Config shift_cfg;
  shift_cfg.filter.variant = ModelVariant::shift;
  write_runlog(dir / "s.csv", bad, to_json(shift_cfg).dump(), false);
  write_runlog(dir / "c.csv", good, to_json(Config{}).dump(), false);
  const MetricsTable t = evaluate_runlogs({dir / "s.csv", dir / "c.csv"}, 0.0);
  ASSERT_EQ(t.rows.size(), 2U);
  EXPECT_EQ(t.rows[0].label, "shift+angular");
  EXPECT_EQ(t.rows[1].label, "shift");
  EXPECT_NEAR(t.delta_percent(0, 1)[3], (0.1 - 0.3) / 0.3 * 100.0, 1e-9);

  std::ostringstream out;
  EXPECT_EQ(cmd_evaluate({dir / "c.csv"}, 0.0, dir / "out", out), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.csv"));

  RunLog blind;
  blind.rows.push_back(RunRow{});
  write_runlog(dir / "blind.csv", blind, "", false);
  EXPECT_THROW(evaluate_runlogs({dir / "blind.csv"}, 0.0), std::invalid_argument);
  fs::remove_all(dir);
}

TEST(Commands, ProfileReport) {
  Config cfg = small_config();
  cfg.profile_iterations = 500;
  const VectorMap vmap = demo::vector_map();
  const ProbMap pmap = resolve_prob_map(cfg, vmap);
  const TimingReport r = profile(cfg, pmap, vmap);
  EXPECT_EQ(r.iterations, 500U);
  EXPECT_GT(r.mean_ms, 0.0);
  EXPECT_GT(r.mean_lines, 0.0);
  EXPECT_NEAR(r.transform_pct + r.shift_pct + r.angular_pct + r.resample_pct + r.other_pct, 100.0, 0.5);
}
