#ifndef LFLOC_OBSERVATION_HPP
#define LFLOC_OBSERVATION_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfloc/geometry.hpp"
#include "lfloc/map.hpp"

namespace lfloc {

struct ObsParams {
  double sigma_angle = 0.1;  // rad, angular misalignment noise
  double spacing = 0.5;      // m, polyline resampling step

  void validate() const;
};

/// Which parts of the observation model score a hypothesis.
enum class ModelVariant { shift, angular, combined };

ModelVariant parse_variant(const std::string& name);
const char* variant_name(ModelVariant v);

/// Mean shift-channel density over the points of one map-frame line.
double shift_likelihood(std::span<const Point2> points, const ProbMap& pmap);
double shift_likelihood(const Polyline& line, const ProbMap& pmap);

/// |gamma| = asin(min(1, |d1 - d2| / seg_len)). std::nullopt when either
/// distance is the out-of-map sentinel (the segment is skipped).
std::optional<double> segment_gamma(double d1, double d2, double seg_len);

/// Zero-mean Gaussian density of the misalignment angle.
double angle_density(double gamma, double sigma_angle);

/// Mean angle density over the segments of one map-frame line. Segments with
/// an endpoint outside the map are skipped; returns 0 if all are skipped.
double angular_likelihood(std::span<const Point2> points, const ProbMap& pmap,
                          const ObsParams& params);
double angular_likelihood(const Polyline& line, const ProbMap& pmap, const ObsParams& params);

/// Sums over the K lines of one camera. For K = 0 all three fields are 1.
struct CameraSums {
  double shift_sum = 1.0;
  double angle_sum = 1.0;
  std::size_t lines = 0;

  [[nodiscard]] double combined() const { return shift_sum * angle_sum; }
  /// The camera's factor in the multi-camera product for the given variant.
  [[nodiscard]] double factor(ModelVariant v) const;
};

struct LikelihoodBreakdown {
  double shift_sum = 1.0;  // shift-only model
  double angle_sum = 1.0;  // angular-only model
  double combined = 1.0;   // both parts
  std::vector<double> per_camera;  // combined value of each camera
};

LikelihoodBreakdown camera_likelihood(std::span<const Polyline> lines, const ProbMap& pmap,
                                      const ObsParams& params);

/// Product of per-camera factors, accumulated as a sum of logarithms.
double fused_log_likelihood(std::span<const CameraSums> cameras, ModelVariant v);

/// Detections resampled once per frame and flattened for per-particle scoring.
class PreparedMeasurement {
 public:
  struct Line {
    std::size_t begin = 0;  // into points()
    std::size_t end = 0;
  };
  struct Camera {
    int camera_id = 0;
    std::vector<Line> lines;
  };

  PreparedMeasurement() = default;
  /// Resamples each line to `spacing`; lines shorter than `spacing` keep their vertices.
  PreparedMeasurement(const Measurement& z, double spacing);

  [[nodiscard]] std::span<const Point2> points() const { return points_; }
  /// seg_lengths()[i] is the length of the segment starting at point i.
  [[nodiscard]] std::span<const double> seg_lengths() const { return seg_lengths_; }
  [[nodiscard]] const std::vector<Camera>& cameras() const { return cameras_; }
  [[nodiscard]] std::size_t line_count() const;
  [[nodiscard]] std::size_t segment_count() const;

 private:
  std::vector<Point2> points_;
  std::vector<double> seg_lengths_;
  std::vector<Camera> cameras_;
};

/// Per-line sums evaluated on already-transformed points (same layout as
/// PreparedMeasurement::points()). Used by the filter's phase-timed loop.
void accumulate_shift(const PreparedMeasurement& z, std::span<const Point2> map_points,
                      const ProbMap& pmap, std::span<CameraSums> out);
void accumulate_angular(const PreparedMeasurement& z, std::span<const Point2> map_points,
                        const ProbMap& pmap, const ObsParams& params, std::span<CameraSums> out);

/// Rigid transform of every point; `out` must be as long as the input.
void transform_points(std::span<const Point2> vehicle_points, const Pose& pose, std::span<Point2> out);

/// Multi-camera likelihood of a frame for one pose hypothesis.
LikelihoodBreakdown measurement_likelihood(const Measurement& z, const Pose& pose,
                                           const ProbMap& pmap, const ObsParams& params);
LikelihoodBreakdown measurement_likelihood(const PreparedMeasurement& z, const Pose& pose,
                                           const ProbMap& pmap, const ObsParams& params);

double model_variant(const Measurement& z, const Pose& pose, const ProbMap& pmap,
                     const ObsParams& params, ModelVariant variant);

}  // namespace lfloc

#endif  // LFLOC_OBSERVATION_HPP
