#ifndef LFLOC_SIMULATOR_HPP
#define LFLOC_SIMULATOR_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lfloc/filter.hpp"
#include "lfloc/geometry.hpp"
#include "lfloc/map.hpp"

namespace lfloc {

/// Ground-plane field of view of one camera, vehicle frame (x forward, y left).
struct CameraFootprint {
  int camera_id = 0;
  Ring polygon;
};

/// Front, rear, left and right trapezoids.
std::vector<CameraFootprint> default_cameras();

struct DetectionNoise {
  double sigma_shift_sim = 0.1;                          // m, per-point lateral jitter
  double sigma_angle_sim = 1.0 * std::numbers::pi / 180;  // rad, per-line rotation
  double fp_rate = 0.2;                                  // false-positive lines per camera per frame
  double drop_rate = 0.1;                                // probability a true line is missed
  bool lateral_jitter = true;                            // false: isotropic jitter
  bool per_point_jitter = true;                          // false: one offset per line
  double fp_min_length = 1.0;                            // m
  double fp_max_length = 4.0;                            // m

  void validate() const;
};

struct TimedPose {
  double t = 0.0;
  Pose pose;
};

using Trajectory = std::vector<TimedPose>;

enum class SegmentKind { straight, arc, reverse };

/// One constant-curvature piece of a route. For arcs, `radius` is signed:
/// positive turns left. `length` is the travelled distance.
struct RouteSegment {
  SegmentKind kind = SegmentKind::straight;
  double length = 0.0;
  double radius = 0.0;
  double speed = 1.0;
};

Trajectory make_trajectory(std::span<const RouteSegment> route, const Pose& start, double dt);

/// Per-step pose change expressed in the previous pose, with the same
/// multiplicative noise family as the filter's motion model.
std::vector<OdomDelta> odometry_stream(const Trajectory& traj, const MotionNoise& noise,
                                       std::uint64_t seed);

/// Exact SE(2) integration of odometry deltas.
Pose integrate_odometry(const Pose& start, std::span<const OdomDelta> deltas);

Measurement synthesize_measurement(const Pose& pose, const VectorMap& vmap,
                                   std::span<const CameraFootprint> cams,
                                   const DetectionNoise& noise, double spacing, std::uint64_t seed,
                                   double t);

/// Input of one filter iteration: odometry since the previous frame plus detections.
struct SensorFrame {
  double t = 0.0;
  OdomDelta odom;
  Measurement z;
  std::optional<Pose> truth;
};

/// Frame k carries the odometry from sample k-1 to k (zero for k = 0).
std::vector<SensorFrame> simulate_frames(const VectorMap& vmap, const Trajectory& traj,
                                         std::span<const CameraFootprint> cams,
                                         const DetectionNoise& det_noise,
                                         const MotionNoise& odom_noise, double spacing,
                                         std::uint64_t seed);

enum class InitMode { gaussian, uniform };

struct InitConfig {
  InitMode mode = InitMode::gaussian;
  InitSigmas sigmas{0.5, 0.5, 0.05};
  std::optional<Pose> pose;  // defaults to the first frame's ground truth
};

struct RunRow {
  double t = 0.0;
  std::optional<Pose> truth;
  Pose estimate;
  std::optional<PoseError> error;
  StepTimings timings;
  bool degenerate = false;
};

struct RunLog {
  std::vector<RunRow> rows;
};

RunLog run_filter(std::span<const SensorFrame> frames, const ProbMap& pmap,
                  const FilterConfig& config, const InitConfig& init, std::uint64_t seed);

RunLog run_closed_loop(const VectorMap& vmap, const ProbMap& pmap, const Trajectory& traj,
                       std::span<const CameraFootprint> cams, const DetectionNoise& det_noise,
                       const MotionNoise& odom_noise, const FilterConfig& config,
                       const InitConfig& init, std::uint64_t seed);

}  // namespace lfloc

#endif  // LFLOC_SIMULATOR_HPP
