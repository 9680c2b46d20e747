#include "oco/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "oco/kernels.hpp"

namespace oco {

namespace {

double residual_of(const ProblemSpec& problem, std::span<const double> x) {
  double r = 0.0;
  for (const auto& g : problem.constraints) r = std::max(r, g(x));
  return r;
}

double penalty_of(const ProblemSpec& problem, std::span<const double> x) {
  double p = 0.0;
  for (const auto& g : problem.constraints) p += clip_pos(g(x));
  return p;
}

/// Smallest theta in [0,1] (to bisection precision) with (1-theta) x + theta z feasible.
Vector pull_toward(const ProblemSpec& problem, const Vector& x, const Vector& z) {
  auto blend = [&](double theta) {
    Vector v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) v[i] = (1.0 - theta) * x[i] + theta * z[i];
    return v;
  };
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual_of(problem, blend(mid)) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return blend(hi);
}

bool strictly_feasible_anchor(const ProblemSpec& problem) {
  const auto& z = problem.strictly_feasible;
  if (z.size() != problem.dim() || !problem.domain.contains(z)) return false;
  for (const auto& g : problem.constraints) {
    if (!(g(z) < 0.0)) return false;
  }
  return true;
}

}  // namespace

ConvexFn average_loss(std::span<const ConvexFn> losses) {
  if (losses.empty()) throw std::invalid_argument("average_loss: no losses");
  auto list = std::make_shared<const std::vector<ConvexFn>>(losses.begin(), losses.end());
  const double inv = 1.0 / static_cast<double>(list->size());
  return ConvexFn(
      list->front().dim(),
      [list, inv](std::span<const double> x) {
        double acc = 0.0;
        for (const auto& f : *list) acc += f(x);
        return acc * inv;
      },
      [list, inv](std::span<const double> x, double w, std::span<double> out) {
        for (const auto& f : *list) f.accumulate_subgrad(x, w * inv, out);
      },
      FnTraits{"average_loss", false, std::nullopt});
}

OracleResult offline_solve(const ProblemSpec& problem, const ConvexFn& objective,
                           const OfflineOptions& options) {
  if (options.iters == 0) throw std::invalid_argument("offline_solve: iters must be >= 1");
  if (objective.dim() != problem.dim()) throw std::invalid_argument("offline_solve: dimension mismatch");
  const std::size_t n = problem.dim();
  const auto& dom = problem.domain;
  const double R = dom.radius();
  const double G = problem.G;
  const bool strong = problem.H1.has_value() && *problem.H1 > 0.0;
  const bool can_restore = options.restore_feasibility && strictly_feasible_anchor(problem);

  Vector x(n, 0.0);
  if (problem.strictly_feasible.size() == n) x = project_ball(problem.strictly_feasible, dom);

  double rho = options.rho0;
  OracleResult best_overall;
  double best_overall_res = std::numeric_limits<double>::infinity();
  std::size_t total_iters = 0;

  for (std::size_t round = 0; round < options.max_rounds; ++round) {
    auto penalised = [&](std::span<const double> v) { return objective(v) + rho * penalty_of(problem, v); };
    Vector best_x = x;
    double best_p = penalised(x);
    Vector avg(n, 0.0);
    double weight_sum = 0.0;
    Vector grad(n);
    for (std::size_t k = 1; k <= options.iters; ++k) {
      std::fill(grad.begin(), grad.end(), 0.0);
      objective.accumulate_subgrad(x, 1.0, grad);
      for (const auto& g : problem.constraints) {
        if (g(x) > 0.0) g.accumulate_subgrad(x, rho, grad);
      }
      const double kd = static_cast<double>(k);
      const double step = strong ? 2.0 / (*problem.H1 * (kd + 1.0)) : R / (G * (1.0 + rho) * std::sqrt(kd));
      kernels::axpy(-step, grad, x);
      project_ball_inplace(x, dom);
      const double p = penalised(x);
      if (p < best_p) {
        best_p = p;
        best_x = x;
      }
      // Strongly convex: weights k; otherwise uniform weights over the second half.
      const double w = strong ? kd : (2 * k > options.iters ? 1.0 : 0.0);
      if (w > 0.0) {
        weight_sum += w;
        const double mix = w / weight_sum;
        for (std::size_t i = 0; i < n; ++i) avg[i] += mix * (x[i] - avg[i]);
      }
    }
    total_iters += options.iters;
    Vector candidate = best_x;
    if (weight_sum > 0.0 && penalised(avg) < best_p) candidate = avg;
    project_ball_inplace(candidate, dom);

    double res = residual_of(problem, candidate);
    if (res > options.tol && can_restore) {
      candidate = pull_toward(problem, candidate, problem.strictly_feasible);
      res = residual_of(problem, candidate);
    }
    OracleResult r{candidate, objective(candidate), res, total_iters, rho, "exact-penalty subgradient"};
    if (res < best_overall_res) {
      best_overall_res = res;
      best_overall = r;
    }
    if (res <= options.tol) return r;
    x = best_x;
    rho *= 2.0;
  }
  throw OracleError("offline_solve: feasibility tolerance not reached (residual " +
                        std::to_string(best_overall_res) + ")",
                    best_overall);
}

OracleResult offline_solve(const ProblemSpec& problem, std::span<const ConvexFn> losses,
                           const OfflineOptions& options) {
  return offline_solve(problem, average_loss(losses), options);
}

OracleResult grid_oracle(const ProblemSpec& problem, const ConvexFn& objective, double resolution) {
  const std::size_t n = problem.dim();
  if (n > 3) throw std::invalid_argument("grid_oracle: dimension must be <= 3");
  if (!(resolution > 0.0)) throw std::invalid_argument("grid_oracle: resolution must be positive");
  const double R = problem.domain.radius();
  const auto K = static_cast<long long>(std::floor(R / resolution));
  constexpr double kFeasTol = 1e-12;

  std::vector<long long> idx(n, -K);
  Vector x(n);
  Vector best;
  double best_v = std::numeric_limits<double>::infinity();
  std::size_t visited = 0;
  const double r2 = R * R * (1.0 + 1e-12);
  while (true) {
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(idx[i]) * resolution;
      sq += x[i] * x[i];
    }
    if (sq <= r2) {
      ++visited;
      bool feasible = true;
      for (const auto& g : problem.constraints) {
        if (g(x) > kFeasTol) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        const double v = objective(x);
        if (v < best_v) {
          best_v = v;
          best = x;
        }
      }
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] > K) {
      idx[d] = -K;
      ++d;
    }
    if (d == n) break;
  }
  if (best.empty()) throw std::runtime_error("grid_oracle: no feasible grid point");
  return OracleResult{best, best_v, residual_of(problem, best), visited, 0.0, "grid"};
}

Vector birkhoff_projection(std::span<const double> y, std::size_t d, std::size_t max_iters, double tol) {
  if (y.size() != d * d) throw std::invalid_argument("birkhoff_projection: size != d*d");
  const double inv_d = 1.0 / static_cast<double>(d);
  const std::size_t n = d * d;
  Vector x(y.begin(), y.end());
  // Dykstra increments, one per set.
  Vector p_row(n, 0.0), p_col(n, 0.0), p_pos(n, 0.0);
  Vector prev(n), tmp(n);
  for (std::size_t it = 0; it < max_iters; ++it) {
    prev = x;
    // Row sums = 1.
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + p_row[k];
    for (std::size_t i = 0; i < d; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += tmp[i * d + j];
      const double shift = (s - 1.0) * inv_d;
      for (std::size_t j = 0; j < d; ++j) x[i * d + j] = tmp[i * d + j] - shift;
    }
    for (std::size_t k = 0; k < n; ++k) p_row[k] = tmp[k] - x[k];
    // Column sums = 1.
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + p_col[k];
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += tmp[i * d + j];
      const double shift = (s - 1.0) * inv_d;
      for (std::size_t i = 0; i < d; ++i) x[i * d + j] = tmp[i * d + j] - shift;
    }
    for (std::size_t k = 0; k < n; ++k) p_col[k] = tmp[k] - x[k];
    // Nonnegativity.
    for (std::size_t k = 0; k < n; ++k) tmp[k] = x[k] + p_pos[k];
    for (std::size_t k = 0; k < n; ++k) x[k] = std::max(tmp[k], 0.0);
    for (std::size_t k = 0; k < n; ++k) p_pos[k] = tmp[k] - x[k];

    double change = 0.0;
    for (std::size_t k = 0; k < n; ++k) change = std::max(change, std::abs(x[k] - prev[k]));
    if (change <= tol) break;
  }
  return x;
}

Vector toy_vertex_solution(std::span<const double> c) {
  if (c.empty()) throw std::invalid_argument("toy_vertex_solution: empty cost");
  std::size_t k = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (std::abs(c[i]) > std::abs(c[k])) k = i;
  }
  Vector x(c.size(), 0.0);
  x[k] = c[k] > 0.0 ? -1.0 : (c[k] < 0.0 ? 1.0 : 0.0);
  return x;
}

BestFixed best_fixed_decision(const ProblemSpec& problem, std::uint64_t seed, std::size_t T,
                              const OfflineOptions& options) {
  if (T == 0) throw std::invalid_argument("best_fixed_decision: T must be >= 1");
  const ConvexFn objective = problem.mean_loss ? problem.mean_loss(seed, T) : [&] {
    const auto fs = losses(problem, seed, T);
    return average_loss(fs);
  }();

  OracleResult r;
  if (problem.name == "toy") {
    const Vector c = objective.subgrad(Vector(problem.dim(), 0.0));
    Vector x = toy_vertex_solution(c);
    r = OracleResult{x, objective(x), residual_of(problem, x), 0, 0.0, "l1 vertex"};
  } else if (problem.name == "doubly-stochastic") {
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(problem.dim()))));
    // grad of 0.5||X - Ybar||^2 at 0 is -Ybar.
    Vector ybar = objective.subgrad(Vector(problem.dim(), 0.0));
    kernels::scale(-1.0, ybar);
    Vector x = birkhoff_projection(ybar, d);
    r = OracleResult{x, objective(x), residual_of(problem, x), 0, 0.0, "dykstra"};
  } else {
    r = offline_solve(problem, objective, options);
  }
  double total = 0.0;
  for (std::size_t t = 1; t <= T; ++t) total += problem.loss_stream(seed, t)(r.x);
  return {r, total};
}

double local_gradient_bound(const ProblemSpec& problem, std::span<const double> x,
                            std::uint64_t seed, std::size_t T) {
  double G = 0.0;
  for (std::size_t t = 1; t <= T; ++t) G = std::max(G, norm2(problem.loss_stream(seed, t).subgrad(x)));
  for (const auto& g : problem.constraints) G = std::max(G, norm2(g.subgrad(x)));
  return G;
}

}  // namespace oco
