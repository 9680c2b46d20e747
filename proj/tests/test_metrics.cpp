#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "oco/metrics.hpp"
#include "oco/oracle.hpp"

using namespace oco;

namespace {

RunTrace trace_from(const std::vector<std::vector<double>>& g, double fx = 0.0) {
  RunTrace trace;
  for (std::size_t k = 0; k < g.size(); ++k) {
    TraceRow row{k + 1, {0.0}, fx, g[k], g[k], Vector(g[k].size(), 0.0), 0.1, 0.1};
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace

TEST_CASE("all-feasible trace") {
  const auto s = summarize(trace_from({{-1.0, -0.5}, {-0.2, -3.0}, {-0.1, -0.1}}), 0.0);
  CHECK(s.T == 3);
  CHECK(s.sum_g[0] == doctest::Approx(-1.3));
  CHECK(s.sum_g_max == doctest::Approx(-0.5 - 0.2 - 0.1));
  CHECK(s.sum_clip_max == 0.0);
  CHECK(s.sum_clip_sq_max == 0.0);
  CHECK(s.max_step_violation == 0.0);
}

TEST_CASE("constant violation") {
  const double v = 0.25;
  const std::size_t T = 40;
  const auto s = summarize(trace_from(std::vector<std::vector<double>>(T, {v})), 0.0);
  CHECK(s.sum_g_max == doctest::Approx(T * v));
  CHECK(s.sum_clip_max == doctest::Approx(T * v));
  CHECK(s.sum_clip_sq_max == doctest::Approx(T * v * v));
  CHECK(s.max_step_violation == v);
}

TEST_CASE("alternating violation cancels only in the raw sum") {
  std::vector<std::vector<double>> g;
  for (int k = 0; k < 10; ++k) g.push_back({k % 2 == 0 ? 1.0 : -1.0});
  const auto s = summarize(trace_from(g), 0.0);
  CHECK(s.sum_g_max == 0.0);
  CHECK(s.sum_clip_max == 5.0);
  CHECK(s.sum_clip_sq_max == 5.0);
}

TEST_CASE("regret subtracts the offline total") {
  const auto s = summarize(trace_from({{0.0}, {0.0}}, 1.5), 2.0);
  CHECK(s.loss_sum == 3.0);
  CHECK(s.regret == 1.0);
}

TEST_CASE("summaries are additive over a split") {
  const auto p = make_problem("toy");
  const auto trace = run(p, default_config(Variant::MahdaviOGD, 500), 3);
  const auto all = summarize_range(trace, 0, 500);
  const auto a = summarize_range(trace, 0, 200);
  const auto b = summarize_range(trace, 200, 500);
  CHECK(all.loss_sum == doctest::Approx(a.loss_sum + b.loss_sum));
  CHECK(all.sum_g_max == doctest::Approx(a.sum_g_max + b.sum_g_max));
  CHECK(all.sum_clip_max == doctest::Approx(a.sum_clip_max + b.sum_clip_max));
  CHECK(all.sum_clip_sq_max == doctest::Approx(a.sum_clip_sq_max + b.sum_clip_sq_max));
  CHECK(all.max_step_violation == std::max(a.max_step_violation, b.max_step_violation));
}

TEST_CASE("violation inequalities on real traces") {
  for (auto v : {Variant::ClippedOGD, Variant::MahdaviOGD, Variant::AOGD}) {
    const auto trace = run(make_problem("toy"), default_config(v, 1000), 2);
    const auto s = summarize(trace, 0.0);
    CHECK(s.sum_g_max <= s.sum_clip_max);
    CHECK(s.sum_clip_max <= std::sqrt(static_cast<double>(s.T) * s.sum_clip_sq_max) * (1.0 + 1e-12));
  }
}

TEST_CASE("late violation") {
  const auto trace = trace_from({{2.0}, {0.5}, {-1.0}, {0.1}});
  CHECK(max_step_violation_after(trace, 0) == 2.0);
  CHECK(max_step_violation_after(trace, 1) == 0.5);
  CHECK(max_step_violation_after(trace, 2) == 0.1);
  CHECK(max_step_violation_after(trace, 4) == 0.0);
}

TEST_CASE("summaries reject malformed traces") {
  CHECK_THROWS_AS(summarize(RunTrace{}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(summarize(trace_from({{1.0}, {1.0, 2.0}}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(summarize_range(trace_from({{1.0}}), 1, 1), std::invalid_argument);
}

TEST_CASE("slope fits") {
  std::vector<std::pair<double, double>> sqrt_law;
  std::vector<std::pair<double, double>> log_law;
  std::vector<std::pair<double, double>> flat;
  for (double T : {100.0, 1000.0, 10000.0, 100000.0}) {
    sqrt_law.emplace_back(T, 3.0 * std::sqrt(T));
    log_law.emplace_back(T, std::log(T));
    flat.emplace_back(T, 7.0);
  }
  CHECK(fit_slope(sqrt_law) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit_slope(flat) == doctest::Approx(0.0).epsilon(1e-12));
  const double log_slope = fit_slope(log_law);
  CHECK(log_slope > 0.0);
  CHECK(log_slope < 0.2);

  CHECK_THROWS_AS(fit_slope(std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(std::vector<std::pair<double, double>>{{1.0, 1.0}, {2.0, 0.0}, {3.0, 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_slope(std::vector<std::pair<double, double>>{{2.0, 1.0}, {2.0, 2.0}, {2.0, 3.0}}),
                  std::invalid_argument);
}

TEST_CASE("floored slope drops numerically zero points") {
  const std::vector<std::pair<double, double>> pts{{10.0, 0.0}, {100.0, 1.0}, {1000.0, 10.0}, {10000.0, 100.0}};
  const auto fit = fit_slope_floored(pts);
  CHECK(fit.kept == 3);
  CHECK(fit.dropped == 1);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean and sample stdev") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto ms = mean_std(v);
  CHECK(ms.mean == 2.5);
  CHECK(ms.stdev == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(mean_std(std::vector<double>{4.0}).stdev == 0.0);
  CHECK_THROWS_AS(mean_std(std::vector<double>{}), std::invalid_argument);
}
