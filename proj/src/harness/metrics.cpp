#include "lfloc/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <limits>
#include <stdexcept>

namespace lfloc::harness {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

double angular_scale(const std::string& unit) {
  if (unit == "deg") return kRadToDeg;
  if (unit == "rad") return 1.0;
  throw std::invalid_argument("angular unit must be deg or rad");
}

}  // namespace

AxisStats axis_stats(std::span<const double> errors) {
  AxisStats s;
  s.count = errors.size();
  if (errors.empty()) return s;
  double sum = 0.0;
  for (double e : errors) {
    const double a = std::abs(e);
    s.max = std::max(s.max, a);
    sum += a;
  }
  s.mae = sum / static_cast<double>(errors.size());
  double var = 0.0;
  for (double e : errors) var += (std::abs(e) - s.mae) * (std::abs(e) - s.mae);
  s.std = std::sqrt(var / static_cast<double>(errors.size()));
  return s;
}

ErrorSummary summarize(std::span<const RunLog> runs, double warmup) {
  std::vector<double> lon;
  std::vector<double> lat;
  std::vector<double> ang;
  ErrorSummary out;
  for (const RunLog& run : runs) {
    for (const RunRow& r : run.rows) {
      if (r.t < warmup) continue;
      if (r.degenerate) ++out.degenerate_steps;
      if (!r.error) continue;
      lon.push_back(r.error->longitudinal);
      lat.push_back(r.error->lateral);
      ang.push_back(r.error->angular);
    }
  }
  if (lon.empty()) throw std::invalid_argument("run logs contain no ground-truth errors after warmup");
  out.longitudinal = axis_stats(lon);
  out.lateral = axis_stats(lat);
  out.angular = axis_stats(ang);
  return out;
}

std::vector<std::string> MetricsTable::column_names(const std::string& angular_unit) {
  angular_scale(angular_unit);
  const std::string u = "[" + angular_unit + "]";
  return {"Longitudinal Max [m]", "Longitudinal MAE [m]", "Lateral Max [m]",
          "Lateral MAE [m]",      "Angular Max " + u,     "Angular MAE " + u};
}

std::vector<double> MetricsTable::values(std::size_t row, const std::string& angular_unit) const {
  const double k = angular_scale(angular_unit);
  const ErrorSummary& s = rows.at(row).summary;
  return {s.longitudinal.max, s.longitudinal.mae, s.lateral.max,
          s.lateral.mae,      k * s.angular.max,  k * s.angular.mae};
}

std::vector<double> MetricsTable::delta_percent(std::size_t a, std::size_t b) const {
  const auto va = values(a, "rad");
  const auto vb = values(b, "rad");
  std::vector<double> out;
  for (std::size_t i = 0; i < va.size(); ++i) {
    out.push_back(vb[i] == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                               : (va[i] - vb[i]) / vb[i] * 100.0);
  }
  return out;
}

std::string MetricsTable::to_text() const {
  std::string out;
  for (const char* unit : {"deg", "rad"}) {
    const double k = angular_scale(unit);
    const auto names = column_names(unit);
    out += pad("variant", 14);
    for (const auto& n : names) out += " | " + pad(n, 22);
    out += '\n';
    for (const MetricsRow& row : rows) {
      const ErrorSummary& s = row.summary;
      out += pad(row.label, 14);
      auto max_cell = [&](double v) { out += " | " + pad(fmt("%.4f", v), 22); };
      auto mae_cell = [&](const AxisStats& a, double scale) {
        out += " | " + pad(fmt("%.4f", scale * a.mae) + " ± " + fmt("%.4f", scale * a.std), 23);
      };
      max_cell(s.longitudinal.max);
      mae_cell(s.longitudinal, 1.0);
      max_cell(s.lateral.max);
      mae_cell(s.lateral, 1.0);
      max_cell(k * s.angular.max);
      mae_cell(s.angular, k);
      out += '\n';
    }
    out += '\n';
  }
  for (std::size_t b = 1; b < rows.size(); ++b) {
    const auto d = delta_percent(0, b);
    out += "delta " + rows[0].label + " vs " + rows[b].label + " [%]:";
    for (double v : d) out += " " + fmt("%+.1f", v);
    out += '\n';
  }
  return out;
}

std::string MetricsTable::to_csv() const {
  std::string out =
      "variant,lon_max_m,lon_mae_m,lon_std_m,lat_max_m,lat_mae_m,lat_std_m,"
      "ang_max_rad,ang_mae_rad,ang_std_rad,ang_max_deg,ang_mae_deg,ang_std_deg,samples,"
      "degenerate_steps\n";
  for (const MetricsRow& row : rows) {
    const ErrorSummary& s = row.summary;
    out += row.label;
    for (double v : {s.longitudinal.max, s.longitudinal.mae, s.longitudinal.std, s.lateral.max,
                     s.lateral.mae, s.lateral.std, s.angular.max, s.angular.mae, s.angular.std,
                     kRadToDeg * s.angular.max, kRadToDeg * s.angular.mae,
                     kRadToDeg * s.angular.std}) {
      out += "," + fmt("%.9g", v);
    }
    out += "," + std::to_string(s.longitudinal.count) + "," + std::to_string(s.degenerate_steps) + "\n";
  }
  return out;
}

TimingReport timing_report(std::span<const StepTimings> steps) {
  TimingReport r;
  r.iterations = steps.size();
  if (steps.empty()) return r;
  StepTimings sum;
  for (const StepTimings& s : steps) {
    sum.transform_ms += s.transform_ms;
    sum.shift_ms += s.shift_ms;
    sum.angular_ms += s.angular_ms;
    sum.resample_ms += s.resample_ms;
    sum.total_ms += s.total_ms;
  }
  const double parts = sum.transform_ms + sum.shift_ms + sum.angular_ms + sum.resample_ms;
  const double total = std::max(sum.total_ms, parts);
  r.mean_ms = sum.total_ms / static_cast<double>(steps.size());
  if (total <= 0.0) {
    r.other_pct = 100.0;
    return r;
  }
  r.transform_pct = 100.0 * sum.transform_ms / total;
  r.shift_pct = 100.0 * sum.shift_ms / total;
  r.angular_pct = 100.0 * sum.angular_ms / total;
  r.resample_pct = 100.0 * sum.resample_ms / total;
  r.other_pct = 100.0 * (total - parts) / total;
  return r;
}

std::string TimingReport::to_text() const {
  std::string out;
  out += "iterations:        " + std::to_string(iterations) + "\n";
  out += "mean iteration:    " + fmt("%.3f", mean_ms) + " ms\n";
  out += "mean lines:        " + fmt("%.1f", mean_lines) + "\n";
  out += "mean segments:     " + fmt("%.1f", mean_segments) + "\n";
  out += "transform:         " + fmt("%5.1f", transform_pct) + " %\n";
  out += "shift part:        " + fmt("%5.1f", shift_pct) + " %\n";
  out += "angular part:      " + fmt("%5.1f", angular_pct) + " %\n";
  out += "resample:          " + fmt("%5.1f", resample_pct) + " %\n";
  out += "other:             " + fmt("%5.1f", other_pct) + " %\n";
  return out;
}

}  // namespace lfloc::harness
