#ifndef LFLOC_HARNESS_METRICS_HPP
#define LFLOC_HARNESS_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "lfloc/filter.hpp"
#include "lfloc/simulator.hpp"

namespace lfloc::harness {

/// Statistics of absolute errors: max, mean and (population) standard deviation.
struct AxisStats {
  double max = 0.0;
  double mae = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

AxisStats axis_stats(std::span<const double> errors);

struct ErrorSummary {
  AxisStats longitudinal;  // m
  AxisStats lateral;       // m
  AxisStats angular;       // rad
  std::size_t degenerate_steps = 0;
};

/// Pools every row with t >= warmup and ground truth over all runs.
/// Throws std::invalid_argument when no such row exists.
ErrorSummary summarize(std::span<const RunLog> runs, double warmup);

struct MetricsRow {
  std::string label;
  ErrorSummary summary;
};

/// One row per variant; Max and MAE ± std for longitudinal,
/// lateral and angular error.
struct MetricsTable {
  std::vector<MetricsRow> rows;

  /// The six numeric column headings, angular in the given unit ("deg" or "rad").
  static std::vector<std::string> column_names(const std::string& angular_unit);
  /// Six values per row in column order; angular converted to `angular_unit`.
  [[nodiscard]] std::vector<double> values(std::size_t row, const std::string& angular_unit) const;
  /// (A - B) / B * 100 per column, A = row `a`, B = row `b`.
  [[nodiscard]] std::vector<double> delta_percent(std::size_t a, std::size_t b) const;

  [[nodiscard]] std::string to_text() const;
  [[nodiscard]] std::string to_csv() const;
};

/// Mean iteration time and its split over the filter stages.
struct TimingReport {
  std::size_t iterations = 0;
  double mean_ms = 0.0;
  double transform_pct = 0.0;
  double shift_pct = 0.0;
  double angular_pct = 0.0;
  double resample_pct = 0.0;
  double other_pct = 0.0;
  double mean_lines = 0.0;
  double mean_segments = 0.0;

  [[nodiscard]] std::string to_text() const;
};

/// Percentages are shares of the summed total time; `other` absorbs prediction,
/// weighting arithmetic and estimation.
TimingReport timing_report(std::span<const StepTimings> steps);

}  // namespace lfloc::harness

#endif  // LFLOC_HARNESS_METRICS_HPP
