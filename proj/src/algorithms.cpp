#include "oco/algorithms.hpp"

#include <cmath>

#include "oco/kernels.hpp"

namespace oco {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::ClippedOGD:
      return "clipped-ogd";
    case Variant::StrongClippedOGD:
      return "strong";
    case Variant::MahdaviOGD:
      return "ogd";
    case Variant::AOGD:
      return "a-ogd";
  }
  return "?";
}

std::string_view to_string(LagrangianKind k) { return k == LagrangianKind::clipped ? "clipped" : "plain"; }

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::per_constraint:
      return "per-constraint";
    case Aggregation::max:
      return "max";
    case Aggregation::logsumexp:
      return "logsumexp";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "clipped-ogd" || s == "clipped") return Variant::ClippedOGD;
  if (s == "strong" || s == "strong-clipped-ogd" || s == "our-strong") return Variant::StrongClippedOGD;
  if (s == "ogd" || s == "mahdavi-ogd" || s == "mahdavi") return Variant::MahdaviOGD;
  if (s == "a-ogd" || s == "aogd") return Variant::AOGD;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

LagrangianKind parse_lagrangian(std::string_view s) {
  if (s == "clipped") return LagrangianKind::clipped;
  if (s == "plain") return LagrangianKind::plain;
  throw std::invalid_argument("unknown lagrangian '" + std::string(s) + "'");
}

Aggregation parse_aggregation(std::string_view s) {
  if (s == "per-constraint" || s == "per_constraint" || s == "none") return Aggregation::per_constraint;
  if (s == "max") return Aggregation::max;
  if (s == "logsumexp" || s == "lse") return Aggregation::logsumexp;
  throw std::invalid_argument("unknown aggregation '" + std::string(s) + "'");
}

void AlgoConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (horizon == 0) throw std::invalid_argument("horizon T must be >= 1");
  auto positive = [](const std::optional<double>& v, const char* what) {
    if (v && !(*v > 0.0 && std::isfinite(*v))) {
      throw std::invalid_argument(std::string(what) + " must be positive");
    }
  };
  positive(eta_override, "eta override");
  positive(sigma_override, "sigma override");
  positive(g_override, "G override");
  positive(h1_override, "H1 override");
  positive(aogd_eta0, "a-ogd eta0");
  positive(aogd_theta0, "a-ogd theta0");
}

AlgoConfig default_config(Variant variant, std::size_t horizon, double beta) {
  AlgoConfig cfg;
  cfg.variant = variant;
  cfg.beta = beta;
  cfg.horizon = horizon;
  const bool baseline = variant == Variant::MahdaviOGD || variant == Variant::AOGD;
  cfg.lagrangian = baseline ? LagrangianKind::plain : LagrangianKind::clipped;
  return cfg;
}

double clipped_sigma(std::size_t m, double G, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  return static_cast<double>(m + 1) * G * G / (2.0 * (1.0 - alpha));
}

FixedHorizonParams fixed_horizon_params(std::size_t m, double G, double R, double alpha, std::size_t T) {
  if (!(G > 0.0) || !(R > 0.0) || T == 0) {
    throw std::invalid_argument("fixed_horizon_params: G, R and T must be positive");
  }
  const double sigma = clipped_sigma(m, G, alpha);
  const double eta = 1.0 / (G * std::sqrt(static_cast<double>(m + 1) * R * static_cast<double>(T)));
  return {sigma, eta};
}

double tradeoff_eta(std::size_t m, double G, double R, double beta, std::size_t T) {
  if (!(G > 0.0) || !(R > 0.0) || T == 0) {
    throw std::invalid_argument("tradeoff_eta: G, R and T must be positive");
  }
  return 1.0 / (std::pow(static_cast<double>(T), beta) * G * std::sqrt(R * static_cast<double>(m + 1)));
}

double strong_eta(double H1, std::size_t t) {
  if (!(H1 > 0.0)) throw std::invalid_argument("strong convexity H1 must be positive");
  return 1.0 / (H1 * static_cast<double>(t + 1));
}

double strong_theta(double H1, std::size_t m, double G, std::size_t t) {
  return strong_eta(H1, t) * static_cast<double>(m + 1) * G * G;
}

RunError::RunError(std::size_t step, const std::string& what)
    : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step), detail_(what) {}

namespace {

void check_state(const StepState& s, std::span<const ConvexFn> duals) {
  if (s.lambda.size() != duals.size()) {
    throw std::invalid_argument("step: multiplier count != dual constraint count");
  }
}

/// x - eta * (d f + sum_j w_j d h_j), projected. `clip` drops terms with h_j <= 0.
Vector primal_update(const StepState& s, const ConvexFn& loss, std::span<const ConvexFn> duals,
                     const BallDomain& dom, double eta, bool clip) {
  Vector grad(s.x.size(), 0.0);
  loss.accumulate_subgrad(s.x, 1.0, grad);
  for (std::size_t j = 0; j < duals.size(); ++j) {
    const double w = s.lambda[j];
    if (w == 0.0) continue;
    if (clip && !(duals[j](s.x) > 0.0)) continue;
    duals[j].accumulate_subgrad(s.x, w, grad);
  }
  if (!all_finite(grad)) throw RunError(s.t, "non-finite Lagrangian subgradient");
  Vector next = s.x;
  kernels::axpy(-eta, grad, next);
  if (!all_finite(next)) throw RunError(s.t, "non-finite primal iterate");
  project_ball_inplace(next, dom);
  return next;
}

/// [h(x)]_+ / denom for every dual constraint.
Vector closed_form_duals(std::span<const ConvexFn> duals, std::span<const double> x, double denom) {
  Vector lambda(duals.size());
  for (std::size_t j = 0; j < duals.size(); ++j) {
    lambda[j] = clip_pos(duals[j](x)) / denom;
#ifdef OCO_FAULT_INJECT_LAMBDA
    lambda[j] *= 1.0 + 1e-6;
#endif
  }
  return lambda;
}

void check_duals(const StepState& s) {
  for (double l : s.lambda) {
    if (!std::isfinite(l)) throw RunError(s.t, "non-finite multiplier");
  }
}

}  // namespace

Vector projected_ogd_step(std::span<const double> x, const ConvexFn& loss, const BallDomain& dom,
                          double eta) {
  const Vector grad = loss.subgrad(x);
  Vector next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) next[i] = x[i] - eta * grad[i];
  project_ball_inplace(next, dom);
  return next;
}

StepState clipped_ogd_step(const StepState& state, const ConvexFn& loss,
                           std::span<const ConvexFn> duals, const BallDomain& dom,
                           ClippedParams params) {
  check_state(state, duals);
  StepState next;
  next.t = state.t + 1;
  next.eta = params.eta;
  next.theta = params.sigma * params.eta;
  next.x = primal_update(state, loss, duals, dom, params.eta, true);
  next.lambda = closed_form_duals(duals, next.x, params.sigma * params.eta);
  check_duals(next);
  return next;
}

StepState strong_clipped_step(const StepState& state, const ConvexFn& loss,
                              std::span<const ConvexFn> duals, const BallDomain& dom, double H1,
                              double G) {
  check_state(state, duals);
  if (!(H1 > 0.0)) throw std::invalid_argument("strong_clipped_step: H1 must be positive");
  const double eta_t = strong_eta(H1, state.t);
  StepState next;
  next.t = state.t + 1;
  next.x = primal_update(state, loss, duals, dom, eta_t, true);
  next.eta = strong_eta(H1, next.t);
  next.theta = strong_theta(H1, duals.size(), G, next.t);
  next.lambda = closed_form_duals(duals, next.x, next.theta);
  check_duals(next);
  return next;
}

StepState mahdavi_step(const StepState& state, const ConvexFn& loss,
                       std::span<const ConvexFn> duals, const BallDomain& dom,
                       MahdaviParams params) {
  check_state(state, duals);
  const bool clipped = params.lagrangian == LagrangianKind::clipped;
  StepState next;
  next.t = state.t + 1;
  next.eta = params.eta;
  next.theta = params.sigma * params.eta;
  next.x = primal_update(state, loss, duals, dom, params.eta, clipped);
  next.lambda.resize(duals.size());
  for (std::size_t j = 0; j < duals.size(); ++j) {
    const double hv = duals[j](state.x);
    const double c = clipped ? clip_pos(hv) : hv;
    const double ascent = c - params.sigma * params.eta * state.lambda[j];
    next.lambda[j] = clip_pos(state.lambda[j] + params.eta * ascent);
  }
  check_duals(next);
  return next;
}

StepState aogd_step(const StepState& state, const ConvexFn& loss, std::span<const ConvexFn> duals,
                    const BallDomain& dom, AogdParams params) {
  check_state(state, duals);
  const bool clipped = params.lagrangian == LagrangianKind::clipped;
  const double decay = std::pow(static_cast<double>(state.t), -params.beta);
  const double eta_t = params.eta0 * decay;
  const double theta_t = params.theta0 * decay;
  StepState next;
  next.t = state.t + 1;
  const double decay_next = std::pow(static_cast<double>(next.t), -params.beta);
  next.eta = params.eta0 * decay_next;
  next.theta = params.theta0 * decay_next;
  next.x = primal_update(state, loss, duals, dom, eta_t, clipped);
  next.lambda.resize(duals.size());
  for (std::size_t j = 0; j < duals.size(); ++j) {
    const double hv = duals[j](state.x);
    const double c = clipped ? clip_pos(hv) : hv;
    next.lambda[j] = clip_pos(state.lambda[j] + theta_t * (c - theta_t * state.lambda[j]));
  }
  check_duals(next);
  return next;
}

std::vector<ConvexFn> dual_constraints(const ProblemSpec& problem, Aggregation aggregation) {
  if (problem.constraints.empty()) throw std::invalid_argument("problem has no constraints");
  switch (aggregation) {
    case Aggregation::per_constraint:
      return problem.constraints;
    case Aggregation::max:
      return {max_aggregate(problem.constraints)};
    case Aggregation::logsumexp:
      return {logsumexp_aggregate(problem.constraints)};
  }
  return problem.constraints;
}

ResolvedParams resolve_params(const ProblemSpec& problem, const AlgoConfig& cfg) {
  cfg.validate();
  ResolvedParams p;
  p.m = cfg.aggregation == Aggregation::per_constraint ? problem.num_constraints() : 1;
  const double G = cfg.g_override.value_or(problem.G);
  p.G = G;
  const double R = problem.domain.radius();
  p.sigma = cfg.sigma_override.value_or(clipped_sigma(p.m, G, cfg.alpha));
  p.eta = cfg.eta_override.value_or(tradeoff_eta(p.m, G, R, cfg.beta, cfg.horizon));
  p.aogd_eta0 = cfg.aogd_eta0.value_or(1.0 / (G * std::sqrt(R * static_cast<double>(p.m + 1))));
  p.aogd_theta0 = cfg.aogd_theta0.value_or(p.sigma * p.aogd_eta0);
  if (cfg.variant == Variant::StrongClippedOGD) {
    const auto h1 = cfg.h1_override ? cfg.h1_override : problem.H1;
    if (!h1 || !(*h1 > 0.0)) {
      throw std::invalid_argument("strongly convex variant needs H1 > 0 (problem '" +
                                  problem.name + "' declares none)");
    }
    p.H1 = *h1;
  }
  return p;
}

namespace {

/// Runs `steps` steps of cfg starting at global loss index `t0` from x0 with zero duals.
void run_segment(const ProblemSpec& problem, const AlgoConfig& cfg, const ResolvedParams& params,
                 std::span<const ConvexFn> duals, std::uint64_t seed, std::size_t t0,
                 std::size_t steps, Vector& x, std::vector<TraceRow>& rows) {
  StepState state;
  state.t = 1;
  state.x = x;
  state.lambda.assign(duals.size(), 0.0);
  switch (cfg.variant) {
    case Variant::StrongClippedOGD:
      state.eta = strong_eta(params.H1, 1);
      state.theta = strong_theta(params.H1, duals.size(), params.G, 1);
      break;
    case Variant::AOGD:
      state.eta = params.aogd_eta0;
      state.theta = params.aogd_theta0;
      break;
    default:
      state.eta = params.eta;
      state.theta = params.sigma * params.eta;
  }
  const auto& dom = problem.domain;
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = t0 + k;
    const ConvexFn loss = problem.loss_stream(seed, t);
    TraceRow row;
    row.t = t;
    row.x = state.x;
    row.fx = loss(state.x);
    row.g.resize(problem.num_constraints());
    for (std::size_t i = 0; i < row.g.size(); ++i) row.g[i] = problem.constraints[i](state.x);
    row.h.resize(duals.size());
    for (std::size_t j = 0; j < duals.size(); ++j) row.h[j] = duals[j](state.x);
    row.lambda = state.lambda;
    row.eta = state.eta;
    row.theta = state.theta;
    if (!std::isfinite(row.fx)) throw RunError(t, "non-finite loss value");
    rows.push_back(std::move(row));
    try {
      switch (cfg.variant) {
        case Variant::ClippedOGD:
          state = clipped_ogd_step(state, loss, duals, dom, {params.sigma, params.eta});
          break;
        case Variant::StrongClippedOGD:
          state = strong_clipped_step(state, loss, duals, dom, params.H1, params.G);
          break;
        case Variant::MahdaviOGD:
          state = mahdavi_step(state, loss, duals, dom, {params.sigma, params.eta, cfg.lagrangian});
          break;
        case Variant::AOGD:
          state = aogd_step(state, loss, duals, dom,
                            {params.aogd_eta0, params.aogd_theta0, cfg.beta, cfg.lagrangian});
          break;
      }
    } catch (const RunError& e) {
      // Re-key from the epoch-local counter to the global step index.
      throw RunError(t, e.detail());
    }
  }
  x = state.x;
}

}  // namespace

RunTrace run(const ProblemSpec& problem, const AlgoConfig& cfg, std::uint64_t seed) {
  RunTrace trace;
  trace.problem = problem.name;
  trace.config = cfg;
  trace.params = resolve_params(problem, cfg);
  trace.seed = seed;
  trace.rows.reserve(cfg.horizon);
  const auto duals = dual_constraints(problem, cfg.aggregation);
  Vector x(problem.dim(), 0.0);
  run_segment(problem, cfg, trace.params, duals, seed, 1, cfg.horizon, x, trace.rows);
  return trace;
}

std::vector<std::size_t> doubling_epochs(std::size_t total_steps) {
  std::vector<std::size_t> epochs;
  std::size_t len = 1;
  std::size_t covered = 0;
  while (covered < total_steps) {
    const std::size_t take = std::min(len, total_steps - covered);
    epochs.push_back(take);
    covered += take;
    len *= 2;
  }
  return epochs;
}

RunTrace doubling_run(const ProblemSpec& problem,
                      const std::function<AlgoConfig(std::size_t)>& cfg_factory,
                      std::size_t total_steps, std::uint64_t seed) {
  if (total_steps == 0) throw std::invalid_argument("doubling_run: total_steps must be >= 1");
  RunTrace trace;
  trace.problem = problem.name;
  trace.seed = seed;
  trace.epoch_starts.clear();
  trace.rows.reserve(total_steps);
  Vector x(problem.dim(), 0.0);
  std::size_t t0 = 1;
  std::size_t len = 1;
  for (std::size_t steps : doubling_epochs(total_steps)) {
    // Parameters follow the nominal epoch length even when the last epoch is cut short.
    AlgoConfig cfg = cfg_factory(len);
    cfg.horizon = len;
    const auto params = resolve_params(problem, cfg);
    const auto duals = dual_constraints(problem, cfg.aggregation);
    trace.epoch_starts.push_back(t0);
    run_segment(problem, cfg, params, duals, seed, t0, steps, x, trace.rows);
    if (t0 == 1) {
      trace.config = cfg;
      trace.params = params;
    }
    t0 += steps;
    len *= 2;
  }
  trace.config.horizon = total_steps;
  return trace;
}

}  // namespace oco
