#pragma once
// Best fixed decision in hindsight, x* = argmin_{x in S} sum_t f_t(x).

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "oco/core.hpp"
#include "oco/problems.hpp"

namespace oco {

struct OracleResult {
  Vector x;
  /// Average loss (1/T) sum_t f_t(x) at x.
  double value = 0.0;
  /// max_i [g_i(x)]_+.
  double residual = 0.0;
  std::size_t iterations = 0;
  double rho = 0.0;
  std::string method;
};

class OracleError : public std::runtime_error {
 public:
  OracleError(const std::string& what, OracleResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const OracleResult& best() const { return best_; }

 private:
  OracleResult best_;
};

struct OfflineOptions {
  /// Subgradient iterations per penalty round.
  std::size_t iters = 200000;
  double tol = 1e-6;
  double rho0 = 1.0;
  std::size_t max_rounds = 12;
  /// Pull an infeasible candidate toward ProblemSpec::strictly_feasible by
  /// bisection when that point satisfies every constraint strictly.
  bool restore_feasibility = true;
};

/// Projected subgradient descent on objective(x) + rho sum_i [g_i(x)]_+ over
/// the ball, doubling rho until the returned point is feasible to `tol`.
/// Stepsizes: 2/(H1 (k+1)) with k-weighted averaging when H1 is known,
/// R / (G (1 + rho) sqrt(k)) otherwise. The candidate is whichever of the best
/// iterate and the averaged iterate has the lower penalised value.
/// Throws OracleError carrying the best iterate when rounds run out.
OracleResult offline_solve(const ProblemSpec& problem, const ConvexFn& objective,
                           const OfflineOptions& options = {});

/// Same, with objective (1/T) sum_t f_t built from the explicit losses.
OracleResult offline_solve(const ProblemSpec& problem, std::span<const ConvexFn> losses,
                           const OfflineOptions& options = {});

/// x -> (1/T) sum_t f_t(x).
ConvexFn average_loss(std::span<const ConvexFn> losses);

/// Exhaustive search over the grid {k * resolution} intersected with the ball
/// and the constraint set (g_i <= 1e-12). Throws std::invalid_argument for
/// n > 3 and std::runtime_error("no feasible grid point") when empty.
OracleResult grid_oracle(const ProblemSpec& problem, const ConvexFn& objective, double resolution);

/// Euclidean projection of a row-major d x d matrix onto the doubly
/// stochastic matrices by Dykstra's alternating projections (row sums, column
/// sums, nonnegativity).
Vector birkhoff_projection(std::span<const double> y, std::size_t d, std::size_t max_iters = 100000,
                           double tol = 1e-14);

/// Minimiser of the l1-ball toy mean loss c^T x over {|x|_1 <= 1, |x|_2 <= 1}:
/// the vertex -sign(c_k) e_k at the largest |c_k| (lowest index on ties).
Vector toy_vertex_solution(std::span<const double> c);

/// x* and its total loss for (problem, seed, T), using the exact route when one
/// exists (toy vertex rule, Birkhoff projection) and offline_solve otherwise.
struct BestFixed {
  OracleResult result;
  /// sum_{t<=T} f_t(x*).
  double total = 0.0;
};
BestFixed best_fixed_decision(const ProblemSpec& problem, std::uint64_t seed, std::size_t T,
                              const OfflineOptions& options = {});

/// max over t <= T of |df_t(x)| and over i of |dg_i(x)|: the gradient bound
/// seen at a single point, typically x*. Much tighter than ProblemSpec::G when
/// that is certified over the whole ball.
double local_gradient_bound(const ProblemSpec& problem, std::span<const double> x,
                            std::uint64_t seed, std::size_t T);

}  // namespace oco
