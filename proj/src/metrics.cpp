#include "oco/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oco {

namespace {

void accumulate_rows(const RunTrace& trace, std::size_t first, std::size_t last, RunSummary& s) {
  if (first >= last || last > trace.rows.size()) {
    throw std::invalid_argument("summarize: empty or out-of-range trace");
  }
  const std::size_t m = trace.rows[first].g.size();
  if (m == 0) throw std::invalid_argument("summarize: rows carry no constraint values");
  s.T = last - first;
  s.sum_g.assign(m, 0.0);
  s.sum_clip.assign(m, 0.0);
  s.sum_clip_sq.assign(m, 0.0);
  for (std::size_t r = first; r < last; ++r) {
    const auto& row = trace.rows[r];
    if (row.g.size() != m) throw std::invalid_argument("summarize: constraint count changes across rows");
    s.loss_sum += row.fx;
    double gmax = row.g[0];
    for (std::size_t i = 0; i < m; ++i) {
      const double v = row.g[i];
      const double c = v > 0.0 ? v : 0.0;
      s.sum_g[i] += v;
      s.sum_clip[i] += c;
      s.sum_clip_sq[i] += c * c;
      gmax = std::max(gmax, v);
    }
    const double cmax = gmax > 0.0 ? gmax : 0.0;
    s.sum_g_max += gmax;
    s.sum_clip_max += cmax;
    s.sum_clip_sq_max += cmax * cmax;
    s.max_step_violation = std::max(s.max_step_violation, cmax);
  }
}

}  // namespace

RunSummary summarize(const RunTrace& trace, double offline_total) {
  RunSummary s;
  if (trace.rows.empty()) throw std::invalid_argument("summarize: empty trace");
  accumulate_rows(trace, 0, trace.rows.size(), s);
  s.regret = s.loss_sum - offline_total;
  return s;
}

RunSummary summarize_range(const RunTrace& trace, std::size_t first, std::size_t last) {
  RunSummary s;
  accumulate_rows(trace, first, last, s);
  s.regret = s.loss_sum;
  return s;
}

double max_step_violation_after(const RunTrace& trace, std::size_t after) {
  double worst = 0.0;
  for (const auto& row : trace.rows) {
    if (row.t <= after) continue;
    for (double v : row.g) worst = std::max(worst, v);
  }
  return worst;
}

double fit_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& [T, v] : points) {
    if (!(T > 0.0) || !(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("fit_slope: horizons and values must be positive and finite");
    }
    sx += std::log(T);
    sy += std::log(v);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& [T, v] : points) {
    const double dx = std::log(T) - mx;
    sxy += dx * (std::log(v) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: horizons must not all coincide");
  return sxy / sxx;
}

SlopeFit fit_slope_floored(std::span<const std::pair<double, double>> points, double floor) {
  std::vector<std::pair<double, double>> kept;
  for (const auto& p : points) {
    if (p.second >= floor) kept.push_back(p);
  }
  const std::size_t dropped = points.size() - kept.size();
  return {fit_slope(kept), kept.size(), dropped};
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

}  // namespace oco
