#include "lfloc/observation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lfloc {

namespace {

double angular_core(std::span<const Point2> pts, std::span<const double> seg_lengths,
                    const ProbMap& pmap, double sigma_angle) {
  const double norm = 1.0 / (sigma_angle * std::sqrt(2.0 * std::numbers::pi));
  const double inv_two_var = 1.0 / (2.0 * sigma_angle * sigma_angle);
  double sum = 0.0;
  std::size_t used = 0;
  double d_prev = pmap.dist_at(pts[0]);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double d_next = pmap.dist_at(pts[i + 1]);
    if (std::isfinite(d_prev) && std::isfinite(d_next)) {
      const double ratio = std::min(1.0, std::abs(d_prev - d_next) / seg_lengths[i]);
      const double gamma = std::asin(ratio);
      sum += norm * std::exp(-gamma * gamma * inv_two_var);
      ++used;
    }
    d_prev = d_next;
  }
  return used == 0 ? 0.0 : sum / static_cast<double>(used);
}

std::vector<double> segment_lengths(std::span<const Point2> pts) {
  std::vector<double> lens(pts.size(), 0.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) lens[i] = distance(pts[i], pts[i + 1]);
  return lens;
}

void require_map_frame(const Polyline& line, const char* op) {
  if (line.frame() != Frame::map) {
    throw GeometryError(std::string(op) + ": line must be in the map frame");
  }
}

}  // namespace

void ObsParams::validate() const {
  if (!(sigma_angle > 0.0) || !std::isfinite(sigma_angle)) {
    throw std::invalid_argument("ObsParams: sigma_angle must be positive");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("ObsParams: spacing must be positive");
  }
}

ModelVariant parse_variant(const std::string& name) {
  if (name == "shift") return ModelVariant::shift;
  if (name == "angular") return ModelVariant::angular;
  if (name == "shift+angular" || name == "combined") return ModelVariant::combined;
  throw std::invalid_argument("unknown model variant '" + name +
                              "' (expected shift, angular or shift+angular)");
}

const char* variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::shift: return "shift";
    case ModelVariant::angular: return "angular";
    case ModelVariant::combined: return "shift+angular";
  }
  return "unknown";
}

double shift_likelihood(std::span<const Point2> points, const ProbMap& pmap) {
  if (points.empty()) throw std::invalid_argument("shift_likelihood: empty line");
  double sum = 0.0;
  for (const Point2& p : points) sum += pmap.shift_at(p);
  return sum / static_cast<double>(points.size());
}

double shift_likelihood(const Polyline& line, const ProbMap& pmap) {
  require_map_frame(line, "shift_likelihood");
  return shift_likelihood(line.points(), pmap);
}

std::optional<double> segment_gamma(double d1, double d2, double seg_len) {
  if (!(seg_len > 0.0) || !std::isfinite(seg_len)) {
    throw std::invalid_argument("segment_gamma: segment length must be positive");
  }
  if (!std::isfinite(d1) || !std::isfinite(d2)) return std::nullopt;
  if (d1 < 0.0 || d2 < 0.0) throw std::invalid_argument("segment_gamma: negative distance");
  return std::asin(std::min(1.0, std::abs(d1 - d2) / seg_len));
}

double angle_density(double gamma, double sigma_angle) {
  return std::exp(-(gamma * gamma) / (2.0 * sigma_angle * sigma_angle)) /
         (sigma_angle * std::sqrt(2.0 * std::numbers::pi));
}

double angular_likelihood(std::span<const Point2> points, const ProbMap& pmap,
                          const ObsParams& params) {
  if (points.size() < 2) {
    throw std::invalid_argument("angular_likelihood: needs at least 2 points");
  }
  const auto lens = segment_lengths(points);
  return angular_core(points, lens, pmap, params.sigma_angle);
}

double angular_likelihood(const Polyline& line, const ProbMap& pmap, const ObsParams& params) {
  require_map_frame(line, "angular_likelihood");
  return angular_likelihood(line.points(), pmap, params);
}

double CameraSums::factor(ModelVariant v) const {
  switch (v) {
    case ModelVariant::shift: return shift_sum;
    case ModelVariant::angular: return angle_sum;
    case ModelVariant::combined: return combined();
  }
  return combined();
}

LikelihoodBreakdown camera_likelihood(std::span<const Polyline> lines, const ProbMap& pmap,
                                      const ObsParams& params) {
  LikelihoodBreakdown out;
  if (!lines.empty()) {
    out.shift_sum = 0.0;
    out.angle_sum = 0.0;
    for (const Polyline& line : lines) {
      out.shift_sum += shift_likelihood(line, pmap);
      out.angle_sum += angular_likelihood(line, pmap, params);
    }
    out.combined = out.shift_sum * out.angle_sum;
  }
  out.per_camera = {out.combined};
  return out;
}

double fused_log_likelihood(std::span<const CameraSums> cameras, ModelVariant v) {
  double log_sum = 0.0;
  for (const CameraSums& c : cameras) log_sum += std::log(c.factor(v));
  return log_sum;
}

PreparedMeasurement::PreparedMeasurement(const Measurement& z, double spacing) {
  for (const CameraLines& cam : z.cameras()) {
    Camera prepared{cam.camera_id, {}};
    for (const Polyline& line : cam.lines) {
      const Polyline resampled = line.length() >= spacing ? resample_equidistant(line, spacing) : line;
      const std::size_t begin = points_.size();
      const auto pts = resampled.points();
      points_.insert(points_.end(), pts.begin(), pts.end());
      const auto lens = segment_lengths(pts);
      seg_lengths_.insert(seg_lengths_.end(), lens.begin(), lens.end());
      prepared.lines.push_back({begin, points_.size()});
    }
    cameras_.push_back(std::move(prepared));
  }
}

std::size_t PreparedMeasurement::line_count() const {
  std::size_t n = 0;
  for (const Camera& c : cameras_) n += c.lines.size();
  return n;
}

std::size_t PreparedMeasurement::segment_count() const {
  return points_.size() - line_count();
}

void transform_points(std::span<const Point2> vehicle_points, const Pose& pose,
                      std::span<Point2> out) {
  const double c = std::cos(pose.theta());
  const double s = std::sin(pose.theta());
  const double tx = pose.x();
  const double ty = pose.y();
  for (std::size_t i = 0; i < vehicle_points.size(); ++i) {
    const Point2 p = vehicle_points[i];
    out[i] = {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
  }
}

void accumulate_shift(const PreparedMeasurement& z, std::span<const Point2> map_points,
                      const ProbMap& pmap, std::span<CameraSums> out) {
  const auto& cams = z.cameras();
  for (std::size_t c = 0; c < cams.size(); ++c) {
    out[c].lines = cams[c].lines.size();
    if (cams[c].lines.empty()) {
      out[c].shift_sum = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const auto& line : cams[c].lines) {
      sum += shift_likelihood(map_points.subspan(line.begin, line.end - line.begin), pmap);
    }
    out[c].shift_sum = sum;
  }
}

void accumulate_angular(const PreparedMeasurement& z, std::span<const Point2> map_points,
                        const ProbMap& pmap, const ObsParams& params, std::span<CameraSums> out) {
  const auto& cams = z.cameras();
  const auto lens = z.seg_lengths();
  for (std::size_t c = 0; c < cams.size(); ++c) {
    out[c].lines = cams[c].lines.size();
    if (cams[c].lines.empty()) {
      out[c].angle_sum = 1.0;
      continue;
    }
    double sum = 0.0;
    for (const auto& line : cams[c].lines) {
      const std::size_t n = line.end - line.begin;
      sum += angular_core(map_points.subspan(line.begin, n), lens.subspan(line.begin, n), pmap,
                          params.sigma_angle);
    }
    out[c].angle_sum = sum;
  }
}

LikelihoodBreakdown measurement_likelihood(const PreparedMeasurement& z, const Pose& pose,
                                           const ProbMap& pmap, const ObsParams& params) {
  std::vector<Point2> map_points(z.points().size());
  transform_points(z.points(), pose, map_points);
  std::vector<CameraSums> sums(z.cameras().size());
  accumulate_shift(z, map_points, pmap, sums);
  accumulate_angular(z, map_points, pmap, params, sums);

  LikelihoodBreakdown out;
  out.shift_sum = std::exp(fused_log_likelihood(sums, ModelVariant::shift));
  out.angle_sum = std::exp(fused_log_likelihood(sums, ModelVariant::angular));
  out.combined = std::exp(fused_log_likelihood(sums, ModelVariant::combined));
  for (const CameraSums& s : sums) out.per_camera.push_back(s.combined());
  return out;
}

LikelihoodBreakdown measurement_likelihood(const Measurement& z, const Pose& pose,
                                           const ProbMap& pmap, const ObsParams& params) {
  params.validate();
  return measurement_likelihood(PreparedMeasurement(z, params.spacing), pose, pmap, params);
}

double model_variant(const Measurement& z, const Pose& pose, const ProbMap& pmap,
                     const ObsParams& params, ModelVariant variant) {
  const LikelihoodBreakdown b = measurement_likelihood(z, pose, pmap, params);
  switch (variant) {
    case ModelVariant::shift: return b.shift_sum;
    case ModelVariant::angular: return b.angle_sum;
    case ModelVariant::combined: return b.combined;
  }
  return b.combined;
}

}  // namespace lfloc
