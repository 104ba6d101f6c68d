#ifndef LFLOC_MAP_HPP
#define LFLOC_MAP_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "lfloc/geometry.hpp"

namespace lfloc {

class MapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  [[nodiscard]] bool contains(Point2 p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

using Ring = std::vector<Point2>;

/// Reference line features plus drivable-area polygons, all in the map frame.
class VectorMap {
 public:
  /// Bounds are computed from the content when not given.
  VectorMap(std::vector<Polyline> lines, std::vector<Ring> drivable);
  VectorMap(std::vector<Polyline> lines, std::vector<Ring> drivable, Bounds bounds);

  [[nodiscard]] const std::vector<Polyline>& lines() const { return lines_; }
  [[nodiscard]] const std::vector<Ring>& drivable() const { return drivable_; }
  [[nodiscard]] const Bounds& bounds() const { return bounds_; }

 private:
  void validate() const;

  std::vector<Polyline> lines_;
  std::vector<Ring> drivable_;
  Bounds bounds_;
};

struct PixelCoord {
  int col = 0;
  int row = 0;
  friend bool operator==(PixelCoord, PixelCoord) = default;
};

/// Raster georeferencing. Pixel (0,0) is centered on `origin`; +col = +x, +row = +y.
struct MapMeta {
  std::uint32_t width = 1;
  std::uint32_t height = 1;
  double resolution = 0.05;
  Point2 origin{};

  /// Smallest raster with the given resolution covering `bounds` plus `margin`.
  static MapMeta covering(const Bounds& bounds, double resolution, double margin = 0.0);

  void validate() const;

  [[nodiscard]] Point2 pixel_center(PixelCoord px) const {
    return {origin.x + px.col * resolution, origin.y + px.row * resolution};
  }
  /// Nearest pixel; may be out of range.
  [[nodiscard]] PixelCoord to_pixel(Point2 p) const {
    return {static_cast<int>(std::floor((p.x - origin.x) / resolution + 0.5)),
            static_cast<int>(std::floor((p.y - origin.y) / resolution + 0.5))};
  }
  [[nodiscard]] bool in_bounds(PixelCoord px) const {
    return px.col >= 0 && px.row >= 0 && static_cast<std::uint32_t>(px.col) < width &&
           static_cast<std::uint32_t>(px.row) < height;
  }
  /// Row-major index of the nearest pixel, or -1 when outside the raster.
  [[nodiscard]] std::ptrdiff_t index_of(Point2 p) const {
    const double fc = std::floor((p.x - origin.x) / resolution + 0.5);
    const double fr = std::floor((p.y - origin.y) / resolution + 0.5);
    if (!(fc >= 0.0 && fr >= 0.0 && fc < width && fr < height)) return -1;
    return static_cast<std::ptrdiff_t>(fr) * width + static_cast<std::ptrdiff_t>(fc);
  }

  friend bool operator==(const MapMeta&, const MapMeta&) = default;
};

/// Dense row-major raster.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::uint32_t width, std::uint32_t height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  [[nodiscard]] std::uint32_t width() const { return width_; }
  [[nodiscard]] std::uint32_t height() const { return height_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  T& at(std::uint32_t col, std::uint32_t row) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  const T& at(std::uint32_t col, std::uint32_t row) const {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  [[nodiscard]] std::vector<T>& data() { return data_; }
  [[nodiscard]] const std::vector<T>& data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<T> data_;
};

enum class Channel : std::uint8_t { line_raster = 1, shift = 2, dist = 3, occupancy = 4 };

const char* channel_name(Channel ch);

/// Gaussian-of-distance density plus the false-positive floor 1/alpha.
inline double shift_density(double dist, double sigma_shift, double alpha) {
  const double peak = 1.0 / (2.0 * std::numbers::pi * sigma_shift * sigma_shift);
  return peak * std::exp(-(dist * dist) / (2.0 * sigma_shift * sigma_shift)) + 1.0 / alpha;
}

/// Precomputed multichannel raster. Immutable once constructed.
class ProbMap {
 public:
  ProbMap(MapMeta meta, double sigma_shift, double alpha, Grid<float> line_raster,
          Grid<float> shift, Grid<float> dist, Grid<float> occupancy);

  [[nodiscard]] const MapMeta& meta() const { return meta_; }
  [[nodiscard]] double sigma_shift() const { return sigma_shift_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] const Grid<float>& channel(Channel ch) const;

  /// Nearest-pixel lookup; out-of-raster points get the channel's neutral value
  /// (shift: 1/alpha, dist: +inf, occupancy and line_raster: 0).
  [[nodiscard]] double lookup(Channel ch, Point2 p) const;
  [[nodiscard]] double neutral_value(Channel ch) const;

  [[nodiscard]] double shift_at(Point2 p) const {
    const auto i = meta_.index_of(p);
    return i < 0 ? floor_ : static_cast<double>(shift_[static_cast<std::size_t>(i)]);
  }
  [[nodiscard]] double dist_at(Point2 p) const {
    const auto i = meta_.index_of(p);
    return i < 0 ? std::numeric_limits<double>::infinity()
                 : static_cast<double>(dist_[static_cast<std::size_t>(i)]);
  }
  [[nodiscard]] bool drivable_at(Point2 p) const {
    const auto i = meta_.index_of(p);
    return i >= 0 && occupancy_[static_cast<std::size_t>(i)] != 0.0F;
  }

  /// Descriptions of violated channel invariants; empty when consistent.
  [[nodiscard]] std::vector<std::string> check_invariants() const;

  friend bool operator==(const ProbMap&, const ProbMap&) = default;

 private:
  MapMeta meta_;
  double sigma_shift_;
  double alpha_;
  double floor_;
  Grid<float> line_raster_;
  Grid<float> shift_;
  Grid<float> dist_;
  Grid<float> occupancy_;
};

/// 1 on every pixel whose cell a map line passes through (a connected path
/// between the endpoint pixels); 0 elsewhere.
Grid<float> rasterize_lines(const VectorMap& vmap, const MapMeta& meta);

/// Exact Euclidean distance (meters) from each pixel center to the nearest set
/// pixel center, via separable lower-envelope passes over squared distances.
Grid<double> build_distance_channel(const Grid<float>& line_raster, const MapMeta& meta);

Grid<float> build_shift_channel(const Grid<float>& dist, double sigma_shift, double alpha);

/// 1 where the pixel center is inside any drivable polygon (even-odd rule).
Grid<float> build_occupancy_channel(const VectorMap& vmap, const MapMeta& meta);

ProbMap compile(const VectorMap& vmap, const MapMeta& meta, double sigma_shift, double alpha);

}  // namespace lfloc

#endif  // LFLOC_MAP_HPP
