#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lfloc/geometry.hpp"

using namespace lfloc;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Point2> pts(const Polyline& l) { return {l.points().begin(), l.points().end()}; }

void expect_point(Point2 actual, Point2 expected, double tol = 1e-12) {
  EXPECT_NEAR(actual.x, expected.x, tol);
  EXPECT_NEAR(actual.y, expected.y, tol);
}

double path_length(std::span<const Point2> p) {
  double len = 0.0;
  for (std::size_t i = 1; i < p.size(); ++i) len += distance(p[i - 1], p[i]);
  return len;
}

}  // namespace

TEST(NormalizeAngle, Examples) {
  EXPECT_EQ(normalize_angle(0.0), 0.0);
  EXPECT_NEAR(normalize_angle(3.0 * kPi), kPi, 1e-12);
  EXPECT_EQ(normalize_angle(-kPi), kPi);
  EXPECT_EQ(normalize_angle(kPi), kPi);
}

TEST(NormalizeAngle, RejectsNonFinite) {
  EXPECT_THROW(normalize_angle(std::numeric_limits<double>::quiet_NaN()), GeometryError);
  EXPECT_THROW(normalize_angle(std::numeric_limits<double>::infinity()), GeometryError);
}

TEST(NormalizeAngle, RangeAndCongruence) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int i = 0; i < 10000; ++i) {
    const double t = u(rng);
    const double n = normalize_angle(t);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
    const double turns = (t - n) / (2.0 * kPi);
    EXPECT_NEAR(turns, std::round(turns), 1e-9);
  }
}

TEST(Pose, HeadingIsNormalized) {
  const Pose p(1.0, 2.0, 3.0 * kPi / 2.0);
  EXPECT_NEAR(p.theta(), -kPi / 2.0, 1e-12);
  EXPECT_THROW(Pose(std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0), GeometryError);
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  const Pose p(3.0, -2.0, 0.7);
  const Pose id = p.compose(p.inverse());
  EXPECT_NEAR(id.x(), 0.0, 1e-12);
  EXPECT_NEAR(id.y(), 0.0, 1e-12);
  EXPECT_NEAR(id.theta(), 0.0, 1e-12);
}

TEST(Polyline, Invariants) {
  EXPECT_THROW(Polyline({{0, 0}}, Frame::map), GeometryError);
  EXPECT_THROW(Polyline({{0, 0}, {0, 0}}, Frame::map), GeometryError);
  EXPECT_THROW(Polyline({{0, 0}, {std::numeric_limits<double>::infinity(), 0}}, Frame::map),
               GeometryError);
  EXPECT_NO_THROW(Polyline({{0, 0}, {1, 0}}, Frame::map));
}

TEST(Measurement, CameraIdsUnique) {
  const Polyline l({{0, 0}, {1, 0}}, Frame::vehicle);
  EXPECT_THROW(Measurement({{1, {l}}, {1, {}}}), GeometryError);
  EXPECT_THROW(Measurement({{1, {Polyline({{0, 0}, {1, 0}}, Frame::map)}}}), GeometryError);
  EXPECT_EQ(Measurement({{1, {l, l}}, {2, {}}}).line_count(), 2U);
}

TEST(TransformToMap, Examples) {
  const Polyline a({{1, 0}, {2, 0}}, Frame::vehicle);
  const auto id = transform_to_map(a, Pose(0, 0, 0));
  EXPECT_EQ(id.frame(), Frame::map);
  expect_point(id[0], {1, 0});
  expect_point(id[1], {2, 0});

  const auto quarter = transform_to_map(a, Pose(0, 0, kPi / 2.0));
  expect_point(quarter[0], {0, 1});
  expect_point(quarter[1], {0, 2});

  const Polyline b({{1, 1}, {2, 1}}, Frame::vehicle);
  const auto half = transform_to_map(b, Pose(3, 4, kPi));
  expect_point(half[0], {2, 3});
  expect_point(half[1], {1, 3});
}

TEST(TransformToMap, RejectsWrongFrame) {
  const Polyline m({{1, 0}, {2, 0}}, Frame::map);
  EXPECT_THROW(transform_to_map(m, Pose()), GeometryError);
  const Polyline v({{1, 0}, {2, 0}}, Frame::vehicle);
  EXPECT_THROW(transform_to_vehicle(v, Pose()), GeometryError);
}

TEST(TransformToMap, RigidMotionProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point2> p;
    for (int i = 0; i < 6; ++i) p.push_back({u(rng), u(rng)});
    const Polyline line(p, Frame::vehicle);
    const Pose pose(u(rng), u(rng), ang(rng));
    const auto moved = transform_to_map(line, pose);
    ASSERT_EQ(moved.size(), line.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::size_t j = i + 1; j < p.size(); ++j) {
        EXPECT_NEAR(distance(moved[i], moved[j]), distance(p[i], p[j]), 1e-9);
      }
    }
    const auto back = transform_to_vehicle(moved, pose);
    for (std::size_t i = 0; i < p.size(); ++i) expect_point(back[i], p[i], 1e-9);
  }
}

TEST(TransformToMap, IdentityPoseKeepsPoints) {
  const Polyline line({{0.25, -3.5}, {7.125, 2.0}, {9.0, 9.0}}, Frame::vehicle);
  const auto out = transform_to_map(line, Pose());
  for (std::size_t i = 0; i < line.size(); ++i) EXPECT_EQ(out[i], line[i]);
}

TEST(ResampleEquidistant, Examples) {
  const auto a = pts(resample_equidistant(Polyline({{0, 0}, {1, 0}}, Frame::map), 0.5));
  ASSERT_EQ(a.size(), 3U);
  expect_point(a[0], {0, 0});
  expect_point(a[1], {0.5, 0});
  expect_point(a[2], {1, 0});

  const auto b = pts(resample_equidistant(Polyline({{0, 0}, {0, 2}}, Frame::map), 2.0));
  ASSERT_EQ(b.size(), 2U);
  expect_point(b[0], {0, 0});
  expect_point(b[1], {0, 2});

  // Arc lengths 0, 0.75, 1.5, 2.0 along the L-shape.
  const auto c = pts(resample_equidistant(Polyline({{0, 0}, {1, 0}, {1, 1}}, Frame::map), 0.75));
  ASSERT_EQ(c.size(), 4U);
  expect_point(c[0], {0, 0});
  expect_point(c[1], {0.75, 0});
  expect_point(c[2], {1, 0.5});
  expect_point(c[3], {1, 1});
}

TEST(ResampleEquidistant, TooShortThrows) {
  EXPECT_THROW(resample_equidistant(Polyline({{0, 0}, {0.3, 0}}, Frame::map), 0.5), GeometryError);
  EXPECT_THROW(resample_equidistant(Polyline({{0, 0}, {1, 0}}, Frame::map), 0.0), GeometryError);
}

TEST(ResampleEquidistant, SpacingAndOnLine) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> sp(0.1, 1.5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point2> in;
    for (int i = 0; i < 5; ++i) in.push_back({u(rng), u(rng)});
    const Polyline line(in, Frame::vehicle);
    const double spacing = sp(rng);
    if (line.length() < spacing) continue;
    const Polyline out = resample_equidistant(line, spacing);
    EXPECT_EQ(out.frame(), Frame::vehicle);
    EXPECT_EQ(out[0], in.front());
    expect_point(out[out.size() - 1], in.back(), 1e-9);
    // Arc-length walk: every step but the last covers exactly `spacing` of path.
    const auto o = out.points();
    for (std::size_t i = 0; i < o.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < in.size(); ++k) {
        best = std::min(best, point_segment_distance(o[i], in[k - 1], in[k]));
      }
      EXPECT_LT(best, 1e-9);
    }
    for (std::size_t i = 1; i + 1 < o.size(); ++i) {
      EXPECT_LE(distance(o[i - 1], o[i]), spacing + 1e-9);
    }
    EXPECT_LE(distance(o[o.size() - 2], o[o.size() - 1]), spacing + 1e-9);
  }
}

TEST(ResampleEquidistant, StraightLinePreservesLengthAndSpacing) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point2 a{u(rng), u(rng)};
    const Point2 b{u(rng), u(rng)};
    const Point2 m = a + 0.37 * (b - a);
    const Polyline line({a, m, b}, Frame::map);
    if (line.length() < 0.5) continue;
    const Polyline out = resample_equidistant(line, 0.5);
    const auto o = out.points();
    EXPECT_NEAR(path_length(o), line.length(), 1e-9);
    for (std::size_t i = 1; i + 1 < o.size(); ++i) EXPECT_NEAR(distance(o[i - 1], o[i]), 0.5, 1e-9);
    EXPECT_LE(distance(o[o.size() - 2], o[o.size() - 1]), 0.5 + 1e-9);
  }
}

TEST(DecomposeError, Examples) {
  const PoseError zero = decompose_error(Pose(1, 2, 0.3), Pose(1, 2, 0.3));
  EXPECT_EQ(zero.longitudinal, 0.0);
  EXPECT_EQ(zero.lateral, 0.0);
  EXPECT_EQ(zero.angular, 0.0);

  const PoseError e1 = decompose_error(Pose(1, 0.5, 0), Pose(0, 0, 0));
  EXPECT_NEAR(e1.longitudinal, 1.0, 1e-12);
  EXPECT_NEAR(e1.lateral, 0.5, 1e-12);
  EXPECT_NEAR(e1.angular, 0.0, 1e-12);

  const PoseError e2 = decompose_error(Pose(1, 0, 0), Pose(0, 0, kPi / 2.0));
  EXPECT_NEAR(e2.longitudinal, 0.0, 1e-12);
  EXPECT_NEAR(e2.lateral, -1.0, 1e-12);
  EXPECT_NEAR(e2.angular, -kPi / 2.0, 1e-12);
}

TEST(DecomposeError, InvariantUnderCommonRigidMotion) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 500; ++trial) {
    const Pose est(u(rng), u(rng), ang(rng));
    const Pose truth(u(rng), u(rng), ang(rng));
    const Pose g(u(rng), u(rng), ang(rng));
    const PoseError a = decompose_error(est, truth);
    const PoseError b = decompose_error(g.compose(est), g.compose(truth));
    EXPECT_NEAR(a.longitudinal, b.longitudinal, 1e-9);
    EXPECT_NEAR(a.lateral, b.lateral, 1e-9);
    EXPECT_NEAR(normalize_angle(a.angular - b.angular), 0.0, 1e-9);
  }
}

TEST(Polygon, PointInPolygonAndSimplicity) {
  const std::vector<Point2> square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_TRUE(point_in_polygon({1, 1}, square));
  EXPECT_FALSE(point_in_polygon({3, 1}, square));
  EXPECT_TRUE(is_simple_polygon(square));
  const std::vector<Point2> bowtie{{0, 0}, {2, 2}, {2, 0}, {0, 2}};
  EXPECT_FALSE(is_simple_polygon(bowtie));
}

TEST(ClipPolyline, KeepsInsidePieces) {
  const std::vector<Point2> square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  const std::vector<Point2> line{{-1, 1}, {3, 1}};
  const auto pieces = clip_polyline(line, square);
  ASSERT_EQ(pieces.size(), 1U);
  expect_point(pieces[0].front(), {0, 1});
  expect_point(pieces[0].back(), {2, 1});

  const std::vector<Point2> zigzag{{-1, 0.5}, {1, 0.5}, {1, 3}, {1.5, 3}, {1.5, 1}};
  const auto two = clip_polyline(zigzag, square);
  ASSERT_EQ(two.size(), 2U);
  expect_point(two[0].front(), {0, 0.5});
  expect_point(two[0].back(), {1, 2});
  expect_point(two[1].front(), {1.5, 2});
  expect_point(two[1].back(), {1.5, 1});

  EXPECT_TRUE(clip_polyline(std::vector<Point2>{{5, 5}, {6, 6}}, square).empty());
}
