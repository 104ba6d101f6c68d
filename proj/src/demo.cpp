#include "lfloc/demo.hpp"

#include <cmath>
#include <numbers>

namespace lfloc::demo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfWidth = 3.5;         // road half width
constexpr double kLane = 1.75;             // lane centre offset
constexpr Point2 kRoundabout{45.0, 0.0};   // roundabout centre
constexpr double kOuterRadius = 15.0;
constexpr double kIslandRadius = 7.0;
constexpr double kPaved = 16.0;            // drivable radius incl. shoulder
constexpr double kLapRadius = 11.0;
constexpr double kSCurveRadius = 20.0;
constexpr double kFlareStart = 20.0;       // x where road A widens into the entry
constexpr double kFlareHalfWidth = 7.0;    // entry half width at the outer circle

Polyline segment(Point2 a, Point2 b) { return {{a, b}, Frame::map}; }

void dashes(std::vector<Polyline>& out, Point2 from, Point2 to, double dash, double gap) {
  const double len = distance(from, to);
  const Point2 dir = (1.0 / len) * (to - from);
  for (double s = 0.0; s + dash <= len + 1e-9; s += dash + gap) {
    out.push_back(segment(from + s * dir, from + (s + dash) * dir));
  }
}

Polyline arc(Point2 c, double r, double a0, double a1, int steps) {
  std::vector<Point2> pts;
  for (int i = 0; i <= steps; ++i) {
    const double a = a0 + (a1 - a0) * i / steps;
    pts.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  return {std::move(pts), Frame::map};
}

Ring rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

// Angle of the S-curve arcs that shift the path sideways by `offset`.
double s_curve_angle(double offset) { return std::acos(1.0 - offset / (2.0 * kSCurveRadius)); }

}  // namespace

VectorMap vector_map() {
  std::vector<Polyline> lines;
  // Where the flared entry meets the roundabout's outer circle.
  const double join_x =
      kRoundabout.x - std::sqrt(kOuterRadius * kOuterRadius - kFlareHalfWidth * kFlareHalfWidth);

  // Road A (east-west) boundaries, interrupted by road B.
  for (double y : {-kHalfWidth, kHalfWidth}) {
    lines.push_back(segment({-60.0, y}, {-kHalfWidth, y}));
    lines.push_back(segment({kHalfWidth, y}, {kFlareStart, y}));
    lines.push_back(segment({kFlareStart, y}, {join_x, y * kFlareHalfWidth / kHalfWidth}));
  }
  dashes(lines, {-58.0, 0.0}, {-8.0, 0.0}, 3.0, 3.0);
  dashes(lines, {8.0, 0.0}, {26.0, 0.0}, 3.0, 3.0);

  // Road B (north-south).
  for (double x : {-kHalfWidth, kHalfWidth}) {
    lines.push_back(segment({x, -40.0}, {x, -kHalfWidth}));
    lines.push_back(segment({x, kHalfWidth}, {x, 40.0}));
  }
  dashes(lines, {0.0, -38.0}, {0.0, -8.0}, 3.0, 3.0);
  dashes(lines, {0.0, 8.0}, {0.0, 38.0}, 3.0, 3.0);

  // Stop lines across the inbound lane of each approach.
  lines.push_back(segment({-6.0, -kHalfWidth}, {-6.0, 0.0}));
  lines.push_back(segment({6.0, 0.0}, {6.0, kHalfWidth}));
  lines.push_back(segment({0.0, -6.0}, {kHalfWidth, -6.0}));
  lines.push_back(segment({-kHalfWidth, 6.0}, {0.0, 6.0}));

  // Roundabout: outer circle open towards road A, closed island.
  const double gap = std::asin(kFlareHalfWidth / kOuterRadius);
  lines.push_back(arc(kRoundabout, kOuterRadius, -kPi + gap, kPi - gap, 72));
  lines.push_back(arc(kRoundabout, kIslandRadius, 0.0, 2.0 * kPi, 48));

  std::vector<Ring> drivable;
  drivable.push_back(rect(-60.0, -kHalfWidth, kFlareStart, kHalfWidth));
  drivable.push_back({{kFlareStart, -kHalfWidth},
                      {join_x + 1.0, -kFlareHalfWidth},
                      {join_x + 1.0, kFlareHalfWidth},
                      {kFlareStart, kHalfWidth}});
  drivable.push_back(rect(-kHalfWidth, -40.0, kHalfWidth, 40.0));
  Ring disk;
  for (int i = 0; i < 96; ++i) {
    const double a = 2.0 * kPi * i / 96;
    disk.push_back({kRoundabout.x + kPaved * std::cos(a), kRoundabout.y + kPaved * std::sin(a)});
  }
  drivable.push_back(std::move(disk));

  return {std::move(lines), std::move(drivable), Bounds{-65.0, -45.0, 65.0, 45.0}};
}

Pose route_start() { return {-50.0, -kLane, 0.0}; }

std::vector<RouteSegment> route() {
  constexpr double kCruise = 6.0;
  constexpr double kTurn = 4.0;
  // Drop from the lane centre to the lap radius below the roundabout centre.
  const double phi = s_curve_angle(kLapRadius - kLane);
  const double s_arc = kSCurveRadius * phi;
  const double s_run = 2.0 * kSCurveRadius * std::sin(phi);
  const double first_straight = (kRoundabout.x - s_run) - route_start().x();
  const double exit_straight = (kRoundabout.x - s_run) - 3.25;
  constexpr double kTurnRadius = 5.0;

  return {
      {SegmentKind::straight, first_straight, 0.0, kCruise},
      {SegmentKind::arc, s_arc, -kSCurveRadius, kTurn},
      {SegmentKind::arc, s_arc, kSCurveRadius, kTurn},
      {SegmentKind::arc, 3.0 * kPi * kLapRadius, kLapRadius, kTurn},
      {SegmentKind::arc, s_arc, kSCurveRadius, kTurn},
      {SegmentKind::arc, s_arc, -kSCurveRadius, kTurn},
      {SegmentKind::straight, exit_straight, 0.0, kCruise},
      {SegmentKind::arc, kTurnRadius * kPi / 2.0, kTurnRadius, 3.0},
      {SegmentKind::straight, 25.0, 0.0, kCruise},
      {SegmentKind::reverse, 10.0, 0.0, 1.5},
  };
}

}  // namespace lfloc::demo
