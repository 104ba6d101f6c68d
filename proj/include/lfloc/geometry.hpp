#ifndef LFLOC_GEOMETRY_HPP
#define LFLOC_GEOMETRY_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace lfloc {

/// Thrown when a geometric precondition (finite values, point count, frame tag) is violated.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wraps an angle into (-pi, pi]. Throws GeometryError on NaN/Inf.
double normalize_angle(double theta);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double k, Point2 p) { return {k * p.x, k * p.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;

  [[nodiscard]] double norm() const { return std::hypot(x, y); }
  [[nodiscard]] bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Point2 a, Point2 b) { return (a - b).norm(); }

/// SE(2) pose in the map frame. The heading is kept in (-pi, pi].
class Pose {
 public:
  Pose() = default;
  Pose(double x, double y, double theta);

  [[nodiscard]] double x() const { return x_; }
  [[nodiscard]] double y() const { return y_; }
  [[nodiscard]] double theta() const { return theta_; }
  [[nodiscard]] Point2 position() const { return {x_, y_}; }

  /// Maps a point expressed in this pose's local frame into the parent frame.
  [[nodiscard]] Point2 apply(Point2 local) const {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    return {c * local.x - s * local.y + x_, s * local.x + c * local.y + y_};
  }
  /// Inverse of apply().
  [[nodiscard]] Point2 apply_inverse(Point2 world) const {
    const double c = std::cos(theta_);
    const double s = std::sin(theta_);
    const double dx = world.x - x_;
    const double dy = world.y - y_;
    return {c * dx + s * dy, -s * dx + c * dy};
  }

  [[nodiscard]] Pose compose(const Pose& rhs) const;
  [[nodiscard]] Pose inverse() const;

  friend bool operator==(const Pose&, const Pose&) = default;

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double theta_ = 0.0;
};

enum class Frame { vehicle, map };

/// Ordered points of one linear feature. At least two points, no NaN/Inf,
/// consecutive points distinct.
class Polyline {
 public:
  Polyline(std::vector<Point2> points, Frame frame);

  [[nodiscard]] std::span<const Point2> points() const { return points_; }
  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] Frame frame() const { return frame_; }
  [[nodiscard]] const Point2& operator[](std::size_t i) const { return points_[i]; }
  [[nodiscard]] double length() const;

  friend bool operator==(const Polyline&, const Polyline&) = default;

 private:
  std::vector<Point2> points_;
  Frame frame_;
};

struct CameraLines {
  int camera_id = 0;
  std::vector<Polyline> lines;  // vehicle frame
};

/// Per-camera detections of one frame. Camera ids are unique.
class Measurement {
 public:
  Measurement() = default;
  explicit Measurement(std::vector<CameraLines> cameras);

  [[nodiscard]] const std::vector<CameraLines>& cameras() const { return cameras_; }
  [[nodiscard]] std::size_t line_count() const;

 private:
  std::vector<CameraLines> cameras_;
};

/// Rigidly moves a vehicle-frame polyline into the map frame.
Polyline transform_to_map(const Polyline& line, const Pose& pose);
/// Map-frame polyline into the vehicle frame of `pose`.
Polyline transform_to_vehicle(const Polyline& line, const Pose& pose);

/// Arc-length walk placing points every `spacing` meters; the last point is
/// the input end point, so the final step may be shorter than `spacing`.
Polyline resample_equidistant(const Polyline& line, double spacing);

struct PoseError {
  double longitudinal = 0.0;
  double lateral = 0.0;
  double angular = 0.0;
};

/// Error of `estimate` expressed along/across the heading of `truth`.
PoseError decompose_error(const Pose& estimate, const Pose& truth);

/// Distance from p to segment [a, b].
double point_segment_distance(Point2 p, Point2 a, Point2 b);

/// Even-odd point-in-polygon test; polygon given as an open ring.
bool point_in_polygon(Point2 p, std::span<const Point2> ring);

/// True if no two non-adjacent edges of the ring intersect.
bool is_simple_polygon(std::span<const Point2> ring);

/// Pieces of `line` that lie inside the polygon `ring`. Pieces keep the
/// original vertices and gain the boundary crossings as end points.
std::vector<std::vector<Point2>> clip_polyline(std::span<const Point2> line,
                                               std::span<const Point2> ring);

}  // namespace lfloc

#endif  // LFLOC_GEOMETRY_HPP
