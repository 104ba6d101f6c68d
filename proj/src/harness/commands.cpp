#include "lfloc/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "lfloc/demo.hpp"
#include "lfloc/harness/io.hpp"
#include "lfloc/map_io.hpp"
#include "lfloc/random.hpp"

namespace lfloc::harness {

namespace {

std::string numbered(const char* stem, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, ext);
  return buf;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create directory " + dir.string() + ": " + ec.message());
}

/// Runs body(i) for i in [0, n) on up to `workers` threads; rethrows the
/// first failure.
template <typename Body>
void run_indexed(std::size_t n, unsigned workers, Body body) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned count = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < count; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

bool degeneracy_exceeded(std::span<const RunLog> logs, const Config& cfg, std::ostream& os) {
  std::size_t steps = 0;
  std::size_t flagged = 0;
  for (const RunLog& log : logs) {
    for (const RunRow& r : log.rows) {
      if (r.t < cfg.warmup) continue;
      ++steps;
      if (r.degenerate) ++flagged;
    }
  }
  const double fraction = steps == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(steps);
  if (flagged > 0) {
    os << "degenerate steps after warmup: " << flagged << " of " << steps << '\n';
  }
  return fraction > cfg.max_degenerate_fraction;
}

std::string channel_stats(const ProbMap& pmap, Channel ch) {
  const Grid<float>& g = pmap.channel(ch);
  const auto [lo, hi] = std::minmax_element(g.data().begin(), g.data().end());
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-12s min %.6g max %.6g", channel_name(ch), static_cast<double>(*lo),
                static_cast<double>(*hi));
  return buf;
}

std::string variant_of(const std::string& config_line) {
  if (config_line.empty()) return "unknown";
  const auto doc = nlohmann::json::parse(config_line, nullptr, false);
  if (doc.is_discarded()) return "unknown";
  const auto* filter = doc.contains("filter") ? &doc.at("filter") : nullptr;
  if (filter == nullptr || !filter->contains("variant") || !filter->at("variant").is_string()) {
    return "unknown";
  }
  return filter->at("variant").get<std::string>();
}

}  // namespace

VectorMap resolve_vector_map(const Config& cfg) {
  if (cfg.map.vector_map.empty()) return demo::vector_map();
  return load_vector_map(cfg.map.vector_map);
}

ProbMap resolve_prob_map(const Config& cfg, const VectorMap& vmap) {
  if (!cfg.map.map_file.empty()) return load_map(cfg.map.map_file);
  const MapMeta meta = MapMeta::covering(vmap.bounds(), cfg.map.resolution);
  return compile(vmap, meta, cfg.map.sigma_shift, cfg.map.alpha);
}

int cmd_build_map(const Config& cfg, const std::filesystem::path& out_file, std::ostream& os) {
  const VectorMap vmap = resolve_vector_map(cfg);
  if (vmap.lines().empty()) throw MapError("vector map has no lines");
  const MapMeta meta = MapMeta::covering(vmap.bounds(), cfg.map.resolution);
  const ProbMap pmap = compile(vmap, meta, cfg.map.sigma_shift, cfg.map.alpha);
  const auto problems = pmap.check_invariants();
  for (const auto& p : problems) os << "invariant violated: " << p << '\n';
  if (out_file.has_parent_path()) ensure_dir(out_file.parent_path());
  save_map(pmap, out_file);
  os << "wrote " << out_file.string() << " (" << meta.width << " x " << meta.height << " px, "
     << meta.resolution << " m/px)\n";
  for (Channel ch : {Channel::line_raster, Channel::shift, Channel::dist, Channel::occupancy}) {
    os << channel_stats(pmap, ch) << '\n';
  }
  return problems.empty() ? kExitOk : kExitFailure;
}

int cmd_simulate(const Config& cfg, const std::filesystem::path& out_dir, std::ostream& os) {
  const VectorMap vmap = resolve_vector_map(cfg);
  const ProbMap pmap = resolve_prob_map(cfg, vmap);
  const Trajectory traj = make_trajectory(cfg.sim.route, cfg.sim.start, cfg.sim.dt);
  ensure_dir(out_dir);

  std::vector<RunLog> logs(cfg.runs);
  run_indexed(cfg.runs, cfg.workers, [&](std::size_t i) {
    Config run_cfg = cfg;
    run_cfg.seed = cfg.seed + i;
    run_cfg.runs = 1;
    const auto frames = simulate_frames(vmap, traj, cfg.sim.cameras, cfg.sim.noise,
                                        cfg.sim.odometry, cfg.filter.obs.spacing, run_cfg.seed);
    logs[i] = run_filter(frames, pmap, cfg.filter, cfg.init, run_cfg.seed);
    write_detections(out_dir / numbered("detections", i, "jsonl"), frames);
    write_runlog(out_dir / numbered("run", i, "csv"), logs[i], to_json(run_cfg).dump(),
                 cfg.log_timings);
  });

  os << "wrote " << cfg.runs << " run(s) to " << out_dir.string() << '\n';
  MetricsTable table;
  table.rows.push_back({variant_name(cfg.filter.variant), summarize(logs, cfg.warmup)});
  os << table.to_text();
  return degeneracy_exceeded(logs, cfg, os) ? kExitDegenerate : kExitOk;
}

int cmd_localize(const Config& cfg, const std::filesystem::path& detections,
                 const std::filesystem::path& out_csv, std::ostream& os, std::ostream& warn) {
  std::set<int> known;
  for (const CameraFootprint& c : cfg.sim.cameras) known.insert(c.camera_id);
  const auto frames = read_detections(detections, known, warn);
  ProbMap pmap = cfg.map.map_file.empty() ? resolve_prob_map(cfg, resolve_vector_map(cfg))
                                          : load_map(cfg.map.map_file);

  InitConfig init = cfg.init;
  if (init.mode == InitMode::gaussian && !init.pose && !frames.empty() && !frames.front().truth) {
    warn << "warning: no initial pose or ground truth; initializing uniformly over the drivable area\n";
    init.mode = InitMode::uniform;
  }
  const RunLog log = run_filter(frames, pmap, cfg.filter, init, cfg.seed);
  if (out_csv.has_parent_path()) ensure_dir(out_csv.parent_path());
  write_runlog(out_csv, log, to_json(cfg).dump(), cfg.log_timings);
  os << "wrote " << log.rows.size() << " step(s) to " << out_csv.string() << '\n';
  const bool has_truth =
      std::any_of(log.rows.begin(), log.rows.end(), [&](const RunRow& r) { return r.error && r.t >= cfg.warmup; });
  if (has_truth) {
    MetricsTable table;
    table.rows.push_back({variant_name(cfg.filter.variant), summarize(std::span(&log, 1), cfg.warmup)});
    os << table.to_text();
  }
  return degeneracy_exceeded(std::span(&log, 1), cfg, os) ? kExitDegenerate : kExitOk;
}

MetricsTable evaluate_runlogs(const std::vector<std::filesystem::path>& runlogs, double warmup) {
  if (runlogs.empty()) throw std::invalid_argument("evaluate: no run logs given");
  std::vector<std::string> order;
  std::map<std::string, std::vector<RunLog>> groups;
  for (const auto& path : runlogs) {
    RunLogFile f = read_runlog(path);
    const std::string v = variant_of(f.config_line);
    if (!groups.count(v)) order.push_back(v);
    groups[v].push_back(std::move(f.log));
  }
  const auto ref = std::find(order.begin(), order.end(), variant_name(ModelVariant::combined));
  if (ref != order.end()) std::rotate(order.begin(), ref, ref + 1);
  MetricsTable table;
  for (const auto& v : order) table.rows.push_back({v, summarize(groups[v], warmup)});
  return table;
}

int cmd_evaluate(const std::vector<std::filesystem::path>& runlogs, double warmup,
                 const std::filesystem::path& out_dir, std::ostream& os) {
  const MetricsTable table = evaluate_runlogs(runlogs, warmup);
  os << table.to_text();
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    const auto path = out_dir / "metrics.csv";
    std::ofstream csv(path, std::ios::binary);
    if (!csv) throw FormatError("cannot write " + path.string());
    csv << table.to_csv();
    os << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

TimingReport profile(const Config& cfg, const ProbMap& pmap, const VectorMap& vmap) {
  FilterConfig fc = cfg.filter;
  fc.threads = 1;
  const Trajectory traj = make_trajectory(cfg.sim.route, cfg.sim.start, cfg.sim.dt);
  const auto frames = simulate_frames(vmap, traj, cfg.sim.cameras, cfg.sim.noise, cfg.sim.odometry,
                                      fc.obs.spacing, cfg.seed);
  std::vector<PreparedMeasurement> prepared;
  prepared.reserve(frames.size());
  for (const SensorFrame& f : frames) prepared.emplace_back(f.z, fc.obs.spacing);

  const std::uint64_t seed = stream_seed(cfg.seed, 4);
  std::vector<StepTimings> timings;
  double lines = 0.0;
  double segments = 0.0;
  std::optional<ParticleSet> set;
  for (std::size_t it = 0; it < cfg.profile_iterations; ++it) {
    const std::size_t k = it % frames.size();
    // Restart at the beginning of the route once it has been driven.
    if (k == 0) set = init_gaussian(*frames[0].truth, cfg.init.sigmas, fc.particles, seed + it);
    StepResult r = step(*set, frames[k].odom, prepared[k], pmap, fc);
    timings.push_back(r.timings);
    lines += static_cast<double>(prepared[k].line_count());
    segments += static_cast<double>(prepared[k].segment_count());
    set = std::move(r.set);
  }
  TimingReport report = timing_report(timings);
  report.mean_lines = lines / static_cast<double>(cfg.profile_iterations);
  report.mean_segments = segments / static_cast<double>(cfg.profile_iterations);
  return report;
}

int cmd_profile(const Config& cfg, std::ostream& os) {
  const VectorMap vmap = resolve_vector_map(cfg);
  const ProbMap pmap = resolve_prob_map(cfg, vmap);
  const TimingReport report = profile(cfg, pmap, vmap);
  os << "particles:         " << cfg.filter.particles << '\n' << report.to_text();
  return kExitOk;
}

}  // namespace lfloc::harness
