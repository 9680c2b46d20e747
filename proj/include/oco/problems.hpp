#pragma once
// Experiment problems: seeded loss streams over a Euclidean ball with
// analytic constraint sets and Lipschitz / strong-convexity metadata.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oco/core.hpp"

namespace oco {

struct ProblemSpec {
  std::string name;
  std::vector<ConvexFn> constraints;
  BallDomain domain;
  /// Upper bound on every subgradient norm of f_t and g_i over the ball.
  double G = 1.0;
  /// Strong convexity modulus of every f_t, when known.
  std::optional<double> H1;
  /// f_t for t = 1, 2, ...; a pure function of (seed, t).
  std::function<ConvexFn(std::uint64_t seed, std::size_t t)> loss_stream;
  /// Closed form of (1/T) sum_{t<=T} f_t. Empty when only the generic
  /// averaging route is available.
  std::function<ConvexFn(std::uint64_t seed, std::size_t T)> mean_loss;
  /// An interior point: g_i < 0 for every constraint that admits it (equality
  /// pairs evaluate to 0 there).
  Vector strictly_feasible;
  std::map<std::string, std::string> metadata;

  std::size_t dim() const { return domain.dimension(); }
  std::size_t num_constraints() const { return constraints.size(); }
};

/// f_1..f_T materialised from the stream.
std::vector<ConvexFn> losses(const ProblemSpec& problem, std::uint64_t seed, std::size_t T);

// ---- toy l1 problem ------------------------------------------------------

/// Raw cost draw for step t, uniform on [0,1.2]x[0,1] (before normalisation).
std::array<double, 2> toy_raw_cost(std::uint64_t seed, std::size_t t);
/// Normalised cost vector c_t with ||c_t|| = 1.
std::array<double, 2> toy_cost(std::uint64_t seed, std::size_t t);

/// f_t(x) = c_t^T x over the unit ball with |x1| + |x2| - 1 <= 0.
ProblemSpec toy_problem();

// ---- doubly stochastic approximation -------------------------------------

/// Row-major d x d permutation matrix Y_t.
Vector random_permutation_matrix(std::size_t d, std::uint64_t seed, std::size_t t);

/// f_t(X) = 0.5 ||Y_t - X||_F^2 with row/column sums pinned by inequality pairs
/// and X >= 0. Constraint order: rows <= 1, rows >= 1, cols <= 1, cols >= 1,
/// then X_ij >= 0 in row-major order. Throws std::invalid_argument for d < 2.
ProblemSpec doubly_stochastic_problem(std::size_t d);

// ---- economic dispatch ---------------------------------------------------

struct DispatchParams {
  std::array<double, 3> a{0.2, 0.12, 0.14};
  std::array<double, 3> b{1.5, 1.0, 0.6};
  std::array<double, 3> d{0.26, 0.38, 0.37};
  std::array<double, 3> e{0.0, 0.0, 0.0};
  double e_max = 100.0;
  double xi = 0.5;
  std::array<double, 3> x_max{20.0, 15.0, 18.0};
  /// Demand per step in generator units (already rescaled).
  std::vector<double> demand;
  /// Factor that was applied to the raw demand series; recorded in metadata.
  double demand_scale = 1.0;
};

/// Default factor taking MW-scale system demand to the three-generator fleet
/// (total capacity 53).
inline constexpr double kDefaultDemandScale = 1.0 / 400.0;

/// f_t(x) = sum_i (a_i x_i^2 / 2 + b_i x_i) + xi (sum_i x_i - d_t)^2 with the
/// emission cap and 0 <= x_i <= x_max_i as constraints. Constraint order:
/// emission, x_i >= 0 (i = 1..3), x_i <= x_max_i (i = 1..3). The demand
/// series repeats when t exceeds its length.
ProblemSpec dispatch_problem(const DispatchParams& params);

/// Demand column of a CSV with rows (index_or_timestamp, demand). A header
/// line is accepted on line 1 only. Values are multiplied by `scale`.
/// Throws std::runtime_error naming the offending line.
std::vector<double> load_demand_csv(const std::filesystem::path& path, double scale = 1.0);

/// MW-scale five-minute demand with a diurnal profile plus noise.
std::vector<double> synthetic_demand(std::size_t steps, std::uint64_t seed);

/// Writes `t,demand` rows with 17 significant digits.
void write_demand_csv(const std::filesystem::path& path, const std::vector<double>& demand);

/// Builds any of the named problems: "toy", "doubly-stochastic", "dispatch".
struct ProblemOptions {
  std::size_t d = 5;
  std::optional<std::filesystem::path> demand_csv;
  double demand_scale = kDefaultDemandScale;
  std::size_t synthetic_steps = 2880;
  std::uint64_t demand_seed = 2018;
};
ProblemSpec make_problem(const std::string& name, const ProblemOptions& options = {});

}  // namespace oco
