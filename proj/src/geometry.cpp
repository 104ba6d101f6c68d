#include "lfloc/geometry.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace lfloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }

// Returns the parameter t along p + t*r where it meets q + u*s, both in [0, 1].
bool segment_intersection(Point2 p, Point2 p2, Point2 q, Point2 q2, double& t) {
  const Point2 r = p2 - p;
  const Point2 s = q2 - q;
  const double denom = cross(r, s);
  if (denom == 0.0) return false;
  const Point2 qp = q - p;
  t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

int orientation(Point2 a, Point2 b, Point2 c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw GeometryError("normalize_angle: non-finite angle");
  }
  // remainder() is exact, so angles already in range come back unchanged.
  double r = std::remainder(theta, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

Pose::Pose(double x, double y, double theta) : x_(x), y_(y), theta_(normalize_angle(theta)) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw GeometryError("Pose: non-finite coordinate");
  }
}

Pose Pose::compose(const Pose& rhs) const {
  const Point2 p = apply(rhs.position());
  return {p.x, p.y, theta_ + rhs.theta_};
}

Pose Pose::inverse() const {
  const double c = std::cos(theta_);
  const double s = std::sin(theta_);
  return {-(c * x_ + s * y_), -(-s * x_ + c * y_), -theta_};
}

Polyline::Polyline(std::vector<Point2> points, Frame frame)
    : points_(std::move(points)), frame_(frame) {
  if (points_.size() < 2) {
    throw GeometryError("Polyline: needs at least 2 points, got " +
                        std::to_string(points_.size()));
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].finite()) throw GeometryError("Polyline: non-finite point");
    if (i > 0 && points_[i] == points_[i - 1]) {
      throw GeometryError("Polyline: repeated consecutive point at index " + std::to_string(i));
    }
  }
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) total += distance(points_[i - 1], points_[i]);
  return total;
}

Measurement::Measurement(std::vector<CameraLines> cameras) : cameras_(std::move(cameras)) {
  std::set<int> ids;
  for (const auto& cam : cameras_) {
    if (!ids.insert(cam.camera_id).second) {
      throw GeometryError("Measurement: duplicate camera id " + std::to_string(cam.camera_id));
    }
    for (const auto& line : cam.lines) {
      if (line.frame() != Frame::vehicle) {
        throw GeometryError("Measurement: lines must be in the vehicle frame");
      }
    }
  }
}

std::size_t Measurement::line_count() const {
  std::size_t n = 0;
  for (const auto& cam : cameras_) n += cam.lines.size();
  return n;
}

Polyline transform_to_map(const Polyline& line, const Pose& pose) {
  if (line.frame() != Frame::vehicle) {
    throw GeometryError("transform_to_map: line is not in the vehicle frame");
  }
  std::vector<Point2> out;
  out.reserve(line.size());
  for (const Point2& p : line.points()) out.push_back(pose.apply(p));
  return {std::move(out), Frame::map};
}

Polyline transform_to_vehicle(const Polyline& line, const Pose& pose) {
  if (line.frame() != Frame::map) {
    throw GeometryError("transform_to_vehicle: line is not in the map frame");
  }
  std::vector<Point2> out;
  out.reserve(line.size());
  for (const Point2& p : line.points()) out.push_back(pose.apply_inverse(p));
  return {std::move(out), Frame::vehicle};
}

Polyline resample_equidistant(const Polyline& line, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw GeometryError("resample_equidistant: spacing must be positive");
  }
  const double total = line.length();
  if (total < spacing) {
    throw GeometryError("resample_equidistant: detection too short (" + std::to_string(total) +
                        " m < spacing " + std::to_string(spacing) + " m)");
  }
  const auto pts = line.points();
  std::vector<Point2> out;
  out.reserve(static_cast<std::size_t>(total / spacing) + 2);
  out.push_back(pts.front());

  // Walk targets k*spacing; `seg_start` is the arc length at pts[seg].
  constexpr double kEps = 1e-9;
  std::size_t seg = 0;
  double seg_start = 0.0;
  double seg_len = distance(pts[0], pts[1]);
  for (std::size_t k = 1;; ++k) {
    const double target = static_cast<double>(k) * spacing;
    if (target > total - kEps) break;
    while (target > seg_start + seg_len && seg + 2 < pts.size()) {
      seg_start += seg_len;
      ++seg;
      seg_len = distance(pts[seg], pts[seg + 1]);
    }
    const double t = std::clamp((target - seg_start) / seg_len, 0.0, 1.0);
    out.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
  }
  out.push_back(pts.back());
  return {std::move(out), line.frame()};
}

PoseError decompose_error(const Pose& estimate, const Pose& truth) {
  const double dx = estimate.x() - truth.x();
  const double dy = estimate.y() - truth.y();
  const double c = std::cos(truth.theta());
  const double s = std::sin(truth.theta());
  return {c * dx + s * dy, -s * dx + c * dy, normalize_angle(estimate.theta() - truth.theta())};
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return distance(p, a);
  const Point2 ap = p - a;
  const double t = std::clamp((ap.x * ab.x + ap.y * ab.y) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

bool point_in_polygon(Point2 p, std::span<const Point2> ring) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = ring[i];
    const Point2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool is_simple_polygon(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_touch(a, b, ring[j], ring[(j + 1) % n])) return false;
    }
  }
  return true;
}

std::vector<std::vector<Point2>> clip_polyline(std::span<const Point2> line,
                                               std::span<const Point2> ring) {
  std::vector<std::vector<Point2>> pieces;
  std::vector<Point2> current;
  auto flush = [&] {
    if (current.size() >= 2) pieces.push_back(std::move(current));
    current.clear();
  };
  const std::size_t n = ring.size();
  std::vector<double> cuts;
  for (std::size_t s = 0; s + 1 < line.size(); ++s) {
    const Point2 a = line[s];
    const Point2 b = line[s + 1];
    cuts.assign({0.0, 1.0});
    for (std::size_t i = 0; i < n; ++i) {
      double t = 0.0;
      if (segment_intersection(a, b, ring[i], ring[(i + 1) % n], t)) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double t0 = cuts[c];
      const double t1 = cuts[c + 1];
      if (t1 - t0 <= 1e-12) continue;
      const Point2 p0 = t0 == 0.0 ? a : a + t0 * (b - a);
      const Point2 p1 = t1 == 1.0 ? b : a + t1 * (b - a);
      if (point_in_polygon(a + (0.5 * (t0 + t1)) * (b - a), ring)) {
        if (current.empty() || !(current.back() == p0)) {
          flush();
          current.push_back(p0);
        }
        current.push_back(p1);
      } else {
        flush();
      }
    }
  }
  flush();
  return pieces;
}

}  // namespace lfloc
