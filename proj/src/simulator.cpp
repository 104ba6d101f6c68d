#include "lfloc/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lfloc/observation.hpp"
#include "lfloc/random.hpp"

namespace lfloc {

namespace {

constexpr std::uint64_t kOdomStream = 1;
constexpr std::uint64_t kDetectionStream = 2;
constexpr std::uint64_t kFilterStream = 3;

Pose advance(const Pose& start, const RouteSegment& seg, double dist) {
  const double c = std::cos(start.theta());
  const double s = std::sin(start.theta());
  switch (seg.kind) {
    case SegmentKind::straight:
      return {start.x() + dist * c, start.y() + dist * s, start.theta()};
    case SegmentKind::reverse:
      return {start.x() - dist * c, start.y() - dist * s, start.theta()};
    case SegmentKind::arc: {
      const double r = seg.radius;
      const double th = start.theta() + dist / r;
      return {start.x() + r * (std::sin(th) - s), start.y() - r * (std::cos(th) - c), th};
    }
  }
  return start;
}

std::vector<Point2> drop_repeats(const std::vector<Point2>& pts) {
  std::vector<Point2> out;
  for (const Point2& p : pts) {
    if (out.empty() || distance(out.back(), p) > 1e-9) out.push_back(p);
  }
  return out;
}

double path_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

// Resampled polyline, or the raw vertices when shorter than one spacing.
std::optional<std::vector<Point2>> as_detection(const std::vector<Point2>& raw, double spacing) {
  const auto pts = drop_repeats(raw);
  if (pts.size() < 2) return std::nullopt;
  Polyline line(pts, Frame::vehicle);
  if (line.length() < spacing) return pts;
  const Polyline r = resample_equidistant(line, spacing);
  return std::vector<Point2>(r.points().begin(), r.points().end());
}

void perturb(std::vector<Point2>& pts, const DetectionNoise& noise, SplitMix64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (noise.sigma_angle_sim > 0.0) {
    const double a = noise.sigma_angle_sim * gauss(rng);
    const Point2 mid = 0.5 * (pts.front() + pts.back());
    const double c = std::cos(a);
    const double s = std::sin(a);
    for (Point2& p : pts) {
      const Point2 d = p - mid;
      p = {mid.x + c * d.x - s * d.y, mid.y + s * d.x + c * d.y};
    }
  }
  if (noise.sigma_shift_sim > 0.0) {
    const std::vector<Point2> base = pts;
    const double line_offset = noise.sigma_shift_sim * gauss(rng);
    const Point2 line_vec{noise.sigma_shift_sim * gauss(rng), noise.sigma_shift_sim * gauss(rng)};
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (noise.lateral_jitter) {
        const Point2 a = base[i == 0 ? 0 : i - 1];
        const Point2 b = base[i + 1 < base.size() ? i + 1 : i];
        const Point2 dir = b - a;
        const double len = dir.norm();
        const Point2 normal = len > 0.0 ? Point2{-dir.y / len, dir.x / len} : Point2{0.0, 1.0};
        const double off = noise.per_point_jitter ? noise.sigma_shift_sim * gauss(rng) : line_offset;
        pts[i] = pts[i] + off * normal;
      } else if (noise.per_point_jitter) {
        pts[i] = pts[i] + Point2{noise.sigma_shift_sim * gauss(rng), noise.sigma_shift_sim * gauss(rng)};
      } else {
        pts[i] = pts[i] + line_vec;
      }
    }
  }
}

Point2 random_point_in(const Ring& polygon, SplitMix64& rng) {
  double xmin = polygon[0].x, xmax = polygon[0].x, ymin = polygon[0].y, ymax = polygon[0].y;
  for (const Point2& p : polygon) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const Point2 p{xmin + (xmax - xmin) * uniform01(rng), ymin + (ymax - ymin) * uniform01(rng)};
    if (point_in_polygon(p, polygon)) return p;
  }
  throw std::runtime_error("camera footprint has no interior");
}

}  // namespace

std::vector<CameraFootprint> default_cameras() {
  return {
      {0, {{2.0, -1.5}, {12.0, -5.0}, {12.0, 5.0}, {2.0, 1.5}}},     // front
      {1, {{-2.0, 1.5}, {-10.0, 4.0}, {-10.0, -4.0}, {-2.0, -1.5}}},  // rear
      {2, {{-2.5, 1.2}, {2.5, 1.2}, {4.5, 6.0}, {-4.5, 6.0}}},        // left
      {3, {{-2.5, -1.2}, {-4.5, -6.0}, {4.5, -6.0}, {2.5, -1.2}}},    // right
  };
}

void DetectionNoise::validate() const {
  if (sigma_shift_sim < 0.0 || sigma_angle_sim < 0.0 || fp_rate < 0.0) {
    throw std::invalid_argument("DetectionNoise: noise parameters must be >= 0");
  }
  if (drop_rate < 0.0 || drop_rate > 1.0) {
    throw std::invalid_argument("DetectionNoise: drop_rate must be in [0, 1]");
  }
  if (!(fp_min_length > 0.0) || fp_max_length < fp_min_length) {
    throw std::invalid_argument("DetectionNoise: need 0 < fp_min_length <= fp_max_length");
  }
}

Trajectory make_trajectory(std::span<const RouteSegment> route, const Pose& start, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("make_trajectory: dt must be positive");
  std::vector<double> seg_t0;
  std::vector<Pose> seg_start;
  double t_total = 0.0;
  Pose cursor = start;
  for (const RouteSegment& seg : route) {
    if (!(seg.length > 0.0)) throw std::invalid_argument("make_trajectory: zero-length segment");
    if (!(seg.speed > 0.0)) throw std::invalid_argument("make_trajectory: speed must be positive");
    if (seg.kind == SegmentKind::arc && seg.radius == 0.0) {
      throw std::invalid_argument("make_trajectory: arc needs a non-zero radius");
    }
    seg_t0.push_back(t_total);
    seg_start.push_back(cursor);
    cursor = advance(cursor, seg, seg.length);
    t_total += seg.length / seg.speed;
  }

  auto pose_at = [&](double t) {
    std::size_t i = 0;
    while (i + 1 < route.size() && t >= seg_t0[i + 1]) ++i;
    const double dist = std::min(route[i].length, (t - seg_t0[i]) * route[i].speed);
    return advance(seg_start[i], route[i], dist);
  };

  Trajectory traj;
  traj.push_back({0.0, start});
  if (route.empty()) return traj;
  for (std::size_t k = 1;; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t > t_total + 1e-9) break;
    traj.push_back({t, pose_at(t)});
  }
  if (traj.back().t < t_total - 1e-9) traj.push_back({t_total, cursor});
  return traj;
}

std::vector<OdomDelta> odometry_stream(const Trajectory& traj, const MotionNoise& noise,
                                       std::uint64_t seed) {
  std::vector<OdomDelta> out;
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const Pose& a = traj[k - 1].pose;
    const Pose& b = traj[k].pose;
    const Point2 local = a.apply_inverse(b.position());
    OdomDelta d{local.x, local.y, normalize_angle(b.theta() - a.theta())};
    if (noise.sigma_linear > 0.0 || noise.sigma_angular > 0.0) {
      SplitMix64 rng(stream_seed(seed, kOdomStream, k));
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double angular = noise.sigma_angular * gauss(rng);
      const double linear = noise.sigma_linear * gauss(rng);
      d.dtheta += d.dtheta * angular;
      d.dx += d.dx * linear;
      d.dy += d.dy * linear;
    }
    out.push_back(d);
  }
  return out;
}

Pose integrate_odometry(const Pose& start, std::span<const OdomDelta> deltas) {
  Pose p = start;
  for (const OdomDelta& d : deltas) p = p.compose(Pose(d.dx, d.dy, d.dtheta));
  return p;
}

Measurement synthesize_measurement(const Pose& pose, const VectorMap& vmap,
                                   std::span<const CameraFootprint> cams,
                                   const DetectionNoise& noise, double spacing, std::uint64_t seed,
                                   double t) {
  noise.validate();
  if (!(spacing > 0.0)) throw std::invalid_argument("synthesize_measurement: spacing must be positive");

  std::vector<std::vector<Point2>> local_lines;
  local_lines.reserve(vmap.lines().size());
  for (const Polyline& line : vmap.lines()) {
    std::vector<Point2> pts;
    pts.reserve(line.size());
    for (const Point2& p : line.points()) pts.push_back(pose.apply_inverse(p));
    local_lines.push_back(std::move(pts));
  }

  const bool noisy = noise.sigma_shift_sim > 0.0 || noise.sigma_angle_sim > 0.0;
  std::vector<CameraLines> cameras;
  for (const CameraFootprint& cam : cams) {
    SplitMix64 rng(stream_seed(seed, kDetectionStream, std::bit_cast<std::uint64_t>(t),
                               static_cast<std::uint64_t>(cam.camera_id)));
    CameraLines out{cam.camera_id, {}};
    auto emit = [&](const std::vector<Point2>& pts) {
      if (auto det = as_detection(pts, spacing)) out.lines.emplace_back(std::move(*det), Frame::vehicle);
    };

    for (const auto& local : local_lines) {
      for (const auto& piece : clip_polyline(local, cam.polygon)) {
        if (path_length(piece) < spacing) continue;
        auto det = as_detection(piece, spacing);
        if (!det) continue;
        if (uniform01(rng) < noise.drop_rate) continue;
        if (!noisy) {
          out.lines.emplace_back(std::move(*det), Frame::vehicle);
          continue;
        }
        perturb(*det, noise, rng);
        // Noise can push points across the footprint edge; keep what is still visible.
        for (const auto& inside : clip_polyline(*det, cam.polygon)) {
          const auto cleaned = drop_repeats(inside);
          if (cleaned.size() >= 2) out.lines.emplace_back(cleaned, Frame::vehicle);
        }
      }
    }

    if (noise.fp_rate > 0.0) {
      std::poisson_distribution<int> count(noise.fp_rate);
      const int k = count(rng);
      for (int i = 0; i < k; ++i) {
        const Point2 center = random_point_in(cam.polygon, rng);
        const double heading = std::numbers::pi * uniform01(rng);
        const double length =
            noise.fp_min_length + (noise.fp_max_length - noise.fp_min_length) * uniform01(rng);
        const Point2 half{0.5 * length * std::cos(heading), 0.5 * length * std::sin(heading)};
        const std::vector<Point2> seg{center - half, center + half};
        // The piece containing the center is the false positive.
        for (const auto& inside : clip_polyline(seg, cam.polygon)) {
          if (point_segment_distance(center, inside.front(), inside.back()) < 1e-9) {
            emit(inside);
            break;
          }
        }
      }
    }
    cameras.push_back(std::move(out));
  }
  return Measurement(std::move(cameras));
}

std::vector<SensorFrame> simulate_frames(const VectorMap& vmap, const Trajectory& traj,
                                         std::span<const CameraFootprint> cams,
                                         const DetectionNoise& det_noise,
                                         const MotionNoise& odom_noise, double spacing,
                                         std::uint64_t seed) {
  const auto odom = odometry_stream(traj, odom_noise, seed);
  std::vector<SensorFrame> frames;
  frames.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    SensorFrame f;
    f.t = traj[k].t;
    if (k > 0) f.odom = odom[k - 1];
    f.z = synthesize_measurement(traj[k].pose, vmap, cams, det_noise, spacing, seed, traj[k].t);
    f.truth = traj[k].pose;
    frames.push_back(std::move(f));
  }
  return frames;
}

RunLog run_filter(std::span<const SensorFrame> frames, const ProbMap& pmap,
                  const FilterConfig& config, const InitConfig& init, std::uint64_t seed) {
  config.obs.validate();
  RunLog log;
  if (frames.empty()) return log;
  const std::uint64_t filter_seed = stream_seed(seed, kFilterStream);
  std::optional<ParticleSet> set;
  if (init.mode == InitMode::uniform) {
    set = init_uniform(pmap, config.particles, filter_seed);
  } else {
    const std::optional<Pose> pose0 = init.pose ? init.pose : frames.front().truth;
    if (!pose0) {
      throw std::invalid_argument("run_filter: gaussian init needs an initial pose or ground truth");
    }
    set = init_gaussian(*pose0, init.sigmas, config.particles, filter_seed);
  }

  log.rows.reserve(frames.size());
  for (const SensorFrame& frame : frames) {
    const PreparedMeasurement z(frame.z, config.obs.spacing);
    StepResult r = step(*set, frame.odom, z, pmap, config);
    RunRow row;
    row.t = frame.t;
    row.truth = frame.truth;
    row.estimate = r.estimate;
    if (frame.truth) row.error = decompose_error(r.estimate, *frame.truth);
    row.timings = r.timings;
    row.degenerate = r.degenerate;
    log.rows.push_back(row);
    set = std::move(r.set);
  }
  return log;
}

RunLog run_closed_loop(const VectorMap& vmap, const ProbMap& pmap, const Trajectory& traj,
                       std::span<const CameraFootprint> cams, const DetectionNoise& det_noise,
                       const MotionNoise& odom_noise, const FilterConfig& config,
                       const InitConfig& init, std::uint64_t seed) {
  const auto frames =
      simulate_frames(vmap, traj, cams, det_noise, odom_noise, config.obs.spacing, seed);
  return run_filter(frames, pmap, config, init, seed);
}

}  // namespace lfloc
