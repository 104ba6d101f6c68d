#include "lfloc/map.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace lfloc {

namespace {

Bounds bounds_of(const std::vector<Polyline>& lines, const std::vector<Ring>& drivable) {
  Bounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  auto grow = [&b](Point2 p) {
    b.xmin = std::min(b.xmin, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.xmax = std::max(b.xmax, p.x);
    b.ymax = std::max(b.ymax, p.y);
  };
  for (const auto& line : lines)
    for (const Point2& p : line.points()) grow(p);
  for (const auto& ring : drivable)
    for (const Point2& p : ring) grow(p);
  if (b.xmin > b.xmax) return Bounds{};
  return b;
}

// Lower envelope of parabolas (q - v)^2 + f[v]; writes the 1D squared EDT into d.
void squared_edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                    std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  auto intersect = [&f](int q, int p) {
    return ((f[q] + static_cast<double>(q) * q) - (f[p] + static_cast<double>(p) * p)) /
           (2.0 * (q - p));
  };
  for (int q = 1; q < n; ++q) {
    double s = intersect(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

void set_pixel(Grid<float>& grid, const MapMeta& meta, PixelCoord px) {
  if (!meta.in_bounds(px)) {
    throw MapError("rasterize_lines: line leaves the raster extent at pixel (" +
                   std::to_string(px.col) + ", " + std::to_string(px.row) + ")");
  }
  grid.at(static_cast<std::uint32_t>(px.col), static_cast<std::uint32_t>(px.row)) = 1.0F;
}

/// Marks every pixel whose half-open cell [c - 1/2, c + 1/2) x [r - 1/2, r + 1/2)
/// the segment a-b passes through, so the nearest pixel of any point on the
/// segment is set.
void trace_segment(Grid<float>& grid, const MapMeta& meta, Point2 a, Point2 b) {
  const double ax = (a.x - meta.origin.x) / meta.resolution + 0.5;
  const double ay = (a.y - meta.origin.y) / meta.resolution + 0.5;
  const double bx = (b.x - meta.origin.x) / meta.resolution + 0.5;
  const double by = (b.y - meta.origin.y) / meta.resolution + 0.5;
  PixelCoord c{static_cast<int>(std::floor(ax)), static_cast<int>(std::floor(ay))};
  const PixelCoord e{static_cast<int>(std::floor(bx)), static_cast<int>(std::floor(by))};
  const double dx = bx - ax;
  const double dy = by - ay;
  const int sx = dx > 0.0 ? 1 : -1;
  const int sy = dy > 0.0 ? 1 : -1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double step_tx = dx != 0.0 ? 1.0 / std::abs(dx) : kInf;
  const double step_ty = dy != 0.0 ? 1.0 / std::abs(dy) : kInf;
  double tx = dx > 0.0 ? (c.col + 1 - ax) / dx : dx < 0.0 ? (ax - c.col) / -dx : kInf;
  double ty = dy > 0.0 ? (c.row + 1 - ay) / dy : dy < 0.0 ? (ay - c.row) / -dy : kInf;

  set_pixel(grid, meta, c);
  while (!(c == e)) {
    bool move_x = tx < ty;
    bool move_y = ty < tx;
    if (tx == ty) {
      // Through a corner: an increasing coordinate enters the next cell at the
      // corner itself, a decreasing one only just after it.
      move_x = sx > 0 || sy < 0;
      move_y = sy > 0 || sx < 0;
    }
    if (c.col == e.col) move_x = false, move_y = true;
    if (c.row == e.row) move_y = false, move_x = true;
    if (move_x) {
      c.col += sx;
      tx += step_tx;
    }
    if (move_y) {
      c.row += sy;
      ty += step_ty;
    }
    set_pixel(grid, meta, c);
  }
}

}  // namespace

VectorMap::VectorMap(std::vector<Polyline> lines, std::vector<Ring> drivable)
    : lines_(std::move(lines)), drivable_(std::move(drivable)) {
  bounds_ = bounds_of(lines_, drivable_);
  validate();
}

VectorMap::VectorMap(std::vector<Polyline> lines, std::vector<Ring> drivable, Bounds bounds)
    : lines_(std::move(lines)), drivable_(std::move(drivable)), bounds_(bounds) {
  validate();
}

void VectorMap::validate() const {
  if (!(bounds_.xmin <= bounds_.xmax && bounds_.ymin <= bounds_.ymax)) {
    throw MapError("VectorMap: inverted bounds");
  }
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    if (lines_[i].frame() != Frame::map) {
      throw MapError("VectorMap: line " + std::to_string(i) + " is not in the map frame");
    }
    for (const Point2& p : lines_[i].points()) {
      if (!bounds_.contains(p)) {
        throw MapError("VectorMap: line " + std::to_string(i) + " leaves the map bounds");
      }
    }
  }
  for (std::size_t i = 0; i < drivable_.size(); ++i) {
    for (const Point2& p : drivable_[i]) {
      if (!p.finite() || !bounds_.contains(p)) {
        throw MapError("VectorMap: drivable polygon " + std::to_string(i) +
                       " leaves the map bounds");
      }
    }
    if (!is_simple_polygon(drivable_[i])) {
      throw MapError("VectorMap: drivable polygon " + std::to_string(i) + " is not simple");
    }
  }
}

MapMeta MapMeta::covering(const Bounds& bounds, double resolution, double margin) {
  if (!(resolution > 0.0)) throw MapError("MapMeta: resolution must be positive");
  MapMeta meta;
  meta.resolution = resolution;
  meta.origin = {bounds.xmin - margin, bounds.ymin - margin};
  meta.width = static_cast<std::uint32_t>(
      std::ceil((bounds.xmax - bounds.xmin + 2.0 * margin) / resolution - 1e-9) + 1);
  meta.height = static_cast<std::uint32_t>(
      std::ceil((bounds.ymax - bounds.ymin + 2.0 * margin) / resolution - 1e-9) + 1);
  return meta;
}

void MapMeta::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw MapError("MapMeta: resolution must be positive");
  }
  if (width < 1 || height < 1) throw MapError("MapMeta: empty raster");
  if (!origin.finite()) throw MapError("MapMeta: non-finite origin");
}

const char* channel_name(Channel ch) {
  switch (ch) {
    case Channel::line_raster: return "line_raster";
    case Channel::shift: return "shift";
    case Channel::dist: return "dist";
    case Channel::occupancy: return "occupancy";
  }
  return "unknown";
}

ProbMap::ProbMap(MapMeta meta, double sigma_shift, double alpha, Grid<float> line_raster,
                 Grid<float> shift, Grid<float> dist, Grid<float> occupancy)
    : meta_(meta),
      sigma_shift_(sigma_shift),
      alpha_(alpha),
      floor_(1.0 / alpha),
      line_raster_(std::move(line_raster)),
      shift_(std::move(shift)),
      dist_(std::move(dist)),
      occupancy_(std::move(occupancy)) {
  meta_.validate();
  if (!(sigma_shift_ > 0.0) || !(alpha_ > 0.0)) {
    throw MapError("ProbMap: sigma_shift and alpha must be positive");
  }
  for (const Grid<float>* g : {&line_raster_, &shift_, &dist_, &occupancy_}) {
    if (g->width() != meta_.width || g->height() != meta_.height) {
      throw MapError("ProbMap: channel size does not match the map metadata");
    }
  }
}

const Grid<float>& ProbMap::channel(Channel ch) const {
  switch (ch) {
    case Channel::line_raster: return line_raster_;
    case Channel::shift: return shift_;
    case Channel::dist: return dist_;
    case Channel::occupancy: return occupancy_;
  }
  throw MapError("ProbMap: unknown channel");
}

double ProbMap::neutral_value(Channel ch) const {
  switch (ch) {
    case Channel::shift: return floor_;
    case Channel::dist: return std::numeric_limits<double>::infinity();
    case Channel::line_raster:
    case Channel::occupancy: return 0.0;
  }
  return 0.0;
}

double ProbMap::lookup(Channel ch, Point2 p) const {
  const auto i = meta_.index_of(p);
  if (i < 0) return neutral_value(ch);
  return static_cast<double>(channel(ch)[static_cast<std::size_t>(i)]);
}

std::vector<std::string> ProbMap::check_invariants() const {
  std::vector<std::string> problems;
  const double peak = 1.0 / (2.0 * std::numbers::pi * sigma_shift_ * sigma_shift_);
  // Float storage: compare against the float-rounded bounds.
  const auto lo = static_cast<float>(floor_);
  const auto hi = static_cast<float>(peak + floor_);
  std::size_t bad_shift = 0, bad_dist = 0, bad_occ = 0, bad_line = 0, bad_identity = 0;
  for (std::size_t i = 0; i < shift_.size(); ++i) {
    const float s = shift_[i];
    const float d = dist_[i];
    const float l = line_raster_[i];
    const float o = occupancy_[i];
    if (!(s >= lo && s <= hi)) ++bad_shift;
    if (!(d >= 0.0F) || ((d == 0.0F) != (l == 1.0F))) ++bad_dist;
    if (o != 0.0F && o != 1.0F) ++bad_occ;
    if (l != 0.0F && l != 1.0F) ++bad_line;
    if (s != static_cast<float>(shift_density(d, sigma_shift_, alpha_))) ++bad_identity;
  }
  auto report = [&problems](std::size_t n, const char* what) {
    if (n > 0) {
      std::ostringstream os;
      os << n << " pixels violate: " << what;
      problems.push_back(os.str());
    }
  };
  report(bad_shift, "1/alpha <= shift <= peak + 1/alpha");
  report(bad_dist, "dist >= 0 and dist == 0 exactly on line pixels");
  report(bad_occ, "occupancy in {0, 1}");
  report(bad_line, "line_raster in {0, 1}");
  report(bad_identity, "shift == g(dist)");
  return problems;
}

Grid<float> rasterize_lines(const VectorMap& vmap, const MapMeta& meta) {
  meta.validate();
  Grid<float> grid(meta.width, meta.height, 0.0F);
  for (const auto& line : vmap.lines()) {
    const auto pts = line.points();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      trace_segment(grid, meta, pts[i], pts[i + 1]);
    }
  }
  return grid;
}

Grid<double> build_distance_channel(const Grid<float>& line_raster, const MapMeta& meta) {
  const std::uint32_t w = line_raster.width();
  const std::uint32_t h = line_raster.height();
  // Large finite stand-in for "no feature"; keeps the envelope arithmetic NaN-free.
  constexpr double kFar = 1e20;
  Grid<double> sq(w, h, kFar);
  bool any = false;
  for (std::size_t i = 0; i < line_raster.size(); ++i) {
    if (line_raster[i] != 0.0F) {
      sq[i] = 0.0;
      any = true;
    }
  }
  if (!any) throw MapError("build_distance_channel: raster has no reference features");

  const std::uint32_t n = std::max(w, h);
  std::vector<double> f, d;
  std::vector<int> v(n);
  std::vector<double> z(n + 1);

  f.resize(h);
  d.resize(h);
  for (std::uint32_t c = 0; c < w; ++c) {
    for (std::uint32_t r = 0; r < h; ++r) f[r] = sq.at(c, r);
    squared_edt_1d(f, d, v, z);
    for (std::uint32_t r = 0; r < h; ++r) sq.at(c, r) = d[r];
  }
  f.resize(w);
  d.resize(w);
  for (std::uint32_t r = 0; r < h; ++r) {
    for (std::uint32_t c = 0; c < w; ++c) f[c] = sq.at(c, r);
    squared_edt_1d(f, d, v, z);
    for (std::uint32_t c = 0; c < w; ++c) sq.at(c, r) = std::sqrt(d[c]) * meta.resolution;
  }
  return sq;
}

Grid<float> build_shift_channel(const Grid<float>& dist, double sigma_shift, double alpha) {
  if (!(sigma_shift > 0.0) || !(alpha > 0.0)) {
    throw MapError("build_shift_channel: sigma_shift and alpha must be positive");
  }
  Grid<float> shift(dist.width(), dist.height());
  for (std::size_t i = 0; i < dist.size(); ++i) {
    shift[i] = static_cast<float>(shift_density(dist[i], sigma_shift, alpha));
  }
  return shift;
}

Grid<float> build_occupancy_channel(const VectorMap& vmap, const MapMeta& meta) {
  meta.validate();
  Grid<float> grid(meta.width, meta.height, 0.0F);
  if (vmap.drivable().empty()) {
    std::cerr << "warning: vector map has no drivable polygons; occupancy channel is empty\n";
    return grid;
  }
  std::vector<double> crossings;
  for (std::uint32_t r = 0; r < meta.height; ++r) {
    const double y = meta.origin.y + r * meta.resolution;
    for (const Ring& ring : vmap.drivable()) {
      crossings.clear();
      const std::size_t n = ring.size();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = ring[i];
        const Point2 b = ring[j];
        if ((a.y > y) != (b.y > y)) crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
      if (crossings.empty()) continue;
      std::sort(crossings.begin(), crossings.end());
      for (std::uint32_t c = 0; c < meta.width; ++c) {
        const double x = meta.origin.x + c * meta.resolution;
        const auto right = crossings.end() - std::upper_bound(crossings.begin(), crossings.end(), x);
        if (right % 2 == 1) grid.at(c, r) = 1.0F;
      }
    }
  }
  return grid;
}

ProbMap compile(const VectorMap& vmap, const MapMeta& meta, double sigma_shift, double alpha) {
  if (!(sigma_shift > 0.0) || !(alpha > 0.0)) {
    throw MapError("compile: sigma_shift and alpha must be positive");
  }
  Grid<float> lines = rasterize_lines(vmap, meta);
  const Grid<double> dist64 = build_distance_channel(lines, meta);
  Grid<float> dist(meta.width, meta.height);
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = static_cast<float>(dist64[i]);
  Grid<float> shift = build_shift_channel(dist, sigma_shift, alpha);
  Grid<float> occupancy = build_occupancy_channel(vmap, meta);
  return {meta, sigma_shift, alpha, std::move(lines), std::move(shift), std::move(dist),
          std::move(occupancy)};
}

}  // namespace lfloc
