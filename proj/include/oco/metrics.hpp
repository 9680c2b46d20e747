#pragma once
// Regret, violation aggregates and log-log slope fits.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "oco/algorithms.hpp"

namespace oco {

struct RunSummary {
  std::size_t T = 0;
  double loss_sum = 0.0;
  /// sum_t f_t(x_t) - sum_t f_t(x*).
  double regret = 0.0;
  // Per raw constraint i.
  std::vector<double> sum_g;        // sum_t g_i(x_t)
  std::vector<double> sum_clip;     // sum_t [g_i(x_t)]_+
  std::vector<double> sum_clip_sq;  // sum_t ([g_i(x_t)]_+)^2
  // Same sums for the max-aggregated constraint g(x) = max_i g_i(x).
  double sum_g_max = 0.0;
  double sum_clip_max = 0.0;
  double sum_clip_sq_max = 0.0;
  /// max_t max_i [g_i(x_t)]_+.
  double max_step_violation = 0.0;
};

/// `offline_total` is sum_{t<=T} f_t(x*) for the same T as the trace.
/// Throws std::invalid_argument on an empty or ragged trace.
RunSummary summarize(const RunTrace& trace, double offline_total);

/// Trace rows [first, last) as a stand-alone summary with zero offline value.
RunSummary summarize_range(const RunTrace& trace, std::size_t first, std::size_t last);

/// max over rows with t > after of max_i [g_i(x_t)]_+.
double max_step_violation_after(const RunTrace& trace, std::size_t after);

/// Least-squares slope of log(value) against log(T). Needs >= 3 points and
/// strictly positive values; throws std::invalid_argument otherwise.
double fit_slope(std::span<const std::pair<double, double>> points);

/// Points with value < floor are dropped before fitting (feasible runs whose
/// violation is numerically zero). Returns the slope and how many points were kept.
struct SlopeFit {
  double slope;
  std::size_t kept;
  std::size_t dropped;
};
SlopeFit fit_slope_floored(std::span<const std::pair<double, double>> points, double floor = 1e-9);

struct MeanStd {
  double mean;
  double stdev;
};
/// Sample standard deviation (n-1); zero for a single value.
MeanStd mean_std(std::span<const double> values);

}  // namespace oco
