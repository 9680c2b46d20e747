#pragma once
// Online primal-dual algorithms for long-term constraints:
//
//   ClippedOGD        projected step on the clipped augmented Lagrangian, dual
//                     set in closed form to [g(x_{t+1})]_+ / (sigma eta)
//   StrongClippedOGD  same with eta_t = 1/(H1 (t+1)), theta_t = eta_t (m+1) G^2
//   MahdaviOGD        simultaneous primal descent / projected dual ascent with a
//                     single fixed stepsize (plain or clipped Lagrangian)
//   AOGD              primal-dual with separate time-varying primal and dual
//                     stepsizes on the max-aggregated constraint

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oco/aggregation.hpp"
#include "oco/core.hpp"
#include "oco/problems.hpp"

namespace oco {

enum class Variant { ClippedOGD, StrongClippedOGD, MahdaviOGD, AOGD };
enum class LagrangianKind { clipped, plain };
enum class Aggregation { per_constraint, max, logsumexp };

std::string_view to_string(Variant v);
std::string_view to_string(LagrangianKind k);
std::string_view to_string(Aggregation a);
/// Accepts the CLI spellings: clipped-ogd, strong, ogd (mahdavi-ogd), a-ogd.
Variant parse_variant(std::string_view s);
LagrangianKind parse_lagrangian(std::string_view s);
Aggregation parse_aggregation(std::string_view s);

struct AlgoConfig {
  Variant variant = Variant::ClippedOGD;
  double beta = 0.5;
  double alpha = 0.5;
  LagrangianKind lagrangian = LagrangianKind::clipped;
  Aggregation aggregation = Aggregation::max;
  std::optional<double> eta_override;
  std::optional<double> sigma_override;
  /// Strong convexity override for StrongClippedOGD (else ProblemSpec::H1).
  std::optional<double> h1_override;
  /// Gradient bound used in the parameter formulas (else ProblemSpec::G).
  std::optional<double> g_override;
  /// A-OGD schedules: eta_t = aogd_eta0 / t^beta, theta_t = mu_t = aogd_theta0 / t^beta.
  /// Defaults derive from G, R, m and sigma.
  std::optional<double> aogd_eta0;
  std::optional<double> aogd_theta0;
  std::size_t horizon = 1;

  /// Throws std::invalid_argument when beta or alpha is outside (0,1) or T = 0.
  void validate() const;
};

/// Experiment defaults for a variant: alpha = 0.5, max aggregation, and the
/// plain Lagrangian for the two baselines (clipped for the Clipped-OGD family).
AlgoConfig default_config(Variant variant, std::size_t horizon, double beta = 0.5);

struct FixedHorizonParams {
  double sigma;
  double eta;
};

/// sigma = (m+1) G^2 / (2 (1 - alpha)), eta = 1 / (G sqrt((m+1) R T)).
FixedHorizonParams fixed_horizon_params(std::size_t m, double G, double R, double alpha, std::size_t T);

/// eta = 1 / (T^beta G sqrt(R (m+1))); equals the fixed_horizon_params stepsize at beta = 1/2.
double tradeoff_eta(std::size_t m, double G, double R, double beta, std::size_t T);

/// sigma from the same formula as fixed_horizon_params.
double clipped_sigma(std::size_t m, double G, double alpha);

/// Strongly convex schedule: eta_t = 1/(H1 (t+1)).
double strong_eta(double H1, std::size_t t);
/// theta_t = eta_t (m+1) G^2.
double strong_theta(double H1, std::size_t m, double G, std::size_t t);

/// Plain projected online gradient descent: x_{t+1} = Pi_B(x_t - eta df_t(x_t)).
Vector projected_ogd_step(std::span<const double> x, const ConvexFn& loss, const BallDomain& dom,
                          double eta);

/// Iterate and duals entering step t.
struct StepState {
  std::size_t t = 1;
  Vector x;
  Vector lambda;
  double eta = 0.0;
  double theta = 0.0;
};

/// Error raised by the run loop; carries the 1-based step index.
class RunError : public std::runtime_error {
 public:
  RunError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }
  /// Message without the step prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t step_;
  std::string detail_;
};

struct ClippedParams {
  double sigma;
  double eta;
};

/// x_{t+1} = Pi_B(x_t - eta dL), lambda_{t+1,i} = [h_i(x_{t+1})]_+ / (sigma eta).
/// `duals` are the constraints carrying multipliers (the raw g_i or an aggregate).
StepState clipped_ogd_step(const StepState& state, const ConvexFn& loss,
                           std::span<const ConvexFn> duals, const BallDomain& dom,
                           ClippedParams params);

/// eta_t = 1/(H1(t+1)); lambda_{t+1} = [h(x_{t+1})]_+ / theta_{t+1},
/// theta_{t+1} = eta_{t+1} (m+1) G^2 with m = duals.size().
StepState strong_clipped_step(const StepState& state, const ConvexFn& loss,
                              std::span<const ConvexFn> duals, const BallDomain& dom, double H1,
                              double G);

struct MahdaviParams {
  double sigma;
  double eta;
  LagrangianKind lagrangian;
};

/// Simultaneous update from (x_t, lambda_t):
///   x_{t+1} = Pi_B(x_t - eta grad_x L), lambda_{t+1} = [lambda_t + eta (c_i(x_t) - sigma eta lambda_i)]_+
/// with c_i = g_i (plain) or [g_i]_+ (clipped).
StepState mahdavi_step(const StepState& state, const ConvexFn& loss,
                       std::span<const ConvexFn> duals, const BallDomain& dom,
                       MahdaviParams params);

struct AogdParams {
  double eta0;
  double theta0;
  double beta;
  LagrangianKind lagrangian;
};

/// eta_t = eta0 / t^beta on x; theta_t = theta0 / t^beta as both the dual
/// regulariser and the dual stepsize:
///   lambda_{t+1} = [lambda_t + theta_t (c(x_t) - theta_t lambda_t)]_+
StepState aogd_step(const StepState& state, const ConvexFn& loss, std::span<const ConvexFn> duals,
                    const BallDomain& dom, AogdParams params);

/// One row per step: the state entering step t and the values observed there.
struct TraceRow {
  std::size_t t;
  Vector x;
  double fx;
  Vector g;       // raw constraints g_i(x_t)
  Vector h;       // constraints carrying duals h_j(x_t)
  Vector lambda;  // lambda_t
  double eta;     // stepsize applied at step t
  double theta;   // dual regulariser at step t (sigma*eta for the fixed-step variants)
};

struct ResolvedParams {
  double sigma = 0.0;
  double eta = 0.0;
  double aogd_eta0 = 0.0;
  double aogd_theta0 = 0.0;
  double H1 = 0.0;
  double G = 0.0;
  /// Dual count used in the parameter formulas.
  std::size_t m = 0;
};

struct RunTrace {
  std::string problem;
  AlgoConfig config;
  ResolvedParams params;
  std::uint64_t seed = 0;
  std::vector<TraceRow> rows;
  /// Epoch start steps (1-based) for doubling runs; {1} otherwise.
  std::vector<std::size_t> epoch_starts{1};

  std::size_t size() const { return rows.size(); }
};

/// Dual-carrying constraints under the configured aggregation.
std::vector<ConvexFn> dual_constraints(const ProblemSpec& problem, Aggregation aggregation);

/// Parameters the run loop will use for (problem, cfg).
ResolvedParams resolve_params(const ProblemSpec& problem, const AlgoConfig& cfg);

/// Runs cfg.horizon steps from x_1 = 0 with lambda_1 = 0.
/// Throws RunError on a non-finite gradient or iterate.
RunTrace run(const ProblemSpec& problem, const AlgoConfig& cfg, std::uint64_t seed);

/// Horizon-free run: epochs of length 1, 2, 4, ... (the last one truncated)
/// covering total_steps, each with the parameters cfg_factory(epoch length).
/// x carries across epochs; lambda resets to 0. Loss indices stay global.
RunTrace doubling_run(const ProblemSpec& problem,
                      const std::function<AlgoConfig(std::size_t)>& cfg_factory,
                      std::size_t total_steps, std::uint64_t seed);

/// Epoch lengths 1, 2, 4, ... summing to total_steps.
std::vector<std::size_t> doubling_epochs(std::size_t total_steps);

}  // namespace oco
