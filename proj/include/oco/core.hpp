#pragma once
// Vector arithmetic, the Euclidean ball domain, positive clipping and the
// subgradient calculus of the clipped augmented Lagrangian.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace oco {

/// Dense decision vector x_t.
using Vector = std::vector<double>;

/// Closed Euclidean ball of radius R centred at the origin in R^n.
class BallDomain {
 public:
  BallDomain(double radius, std::size_t dimension);

  double radius() const { return radius_; }
  std::size_t dimension() const { return dimension_; }
  bool contains(std::span<const double> x, double rel_slack = 0.0) const;

 private:
  double radius_;
  std::size_t dimension_;
};

struct FnTraits {
  std::string name;
  /// Differentiable everywhere on the ball (eligible for finite-difference checks).
  bool smooth = false;
  std::optional<double> lipschitz;
};

/// A convex function with a subgradient oracle.
///
/// The oracle is expressed as an accumulation `out += weight * d(x)` so that
/// sparse constraints (a single row sum, a single coordinate bound) only touch
/// the coordinates they depend on. Instances are immutable and cheap to copy.
class ConvexFn {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using AccumulateFn = std::function<void(std::span<const double> x, double weight,
                                          std::span<double> out)>;

  ConvexFn(std::size_t dim, EvalFn eval, AccumulateFn accumulate, FnTraits traits = {});

  std::size_t dim() const { return dim_; }
  const std::string& name() const { return traits_->name; }
  bool smooth() const { return traits_->smooth; }
  std::optional<double> lipschitz() const { return traits_->lipschitz; }

  double operator()(std::span<const double> x) const { return (*eval_)(x); }
  void accumulate_subgrad(std::span<const double> x, double weight, std::span<double> out) const {
    (*accumulate_)(x, weight, out);
  }
  Vector subgrad(std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::shared_ptr<const EvalFn> eval_;
  std::shared_ptr<const AccumulateFn> accumulate_;
  std::shared_ptr<const FnTraits> traits_;
};

// Building blocks shared by the problem generators and the tests.

/// x -> c^T x + offset.
ConvexFn linear_fn(Vector c, double offset = 0.0, std::string name = "linear");
/// x -> 0.5 * ||x - center||^2.
ConvexFn half_squared_distance(Vector center, std::string name = "half_sq_dist");
/// x -> ||x||_1 - bound. Subgradient is sign(x) with sign(0) = 0.
ConvexFn l1_norm_minus(std::size_t dim, double bound, std::string name = "l1_ball");

double norm2(std::span<const double> x);
bool all_finite(std::span<const double> x);

/// Euclidean projection onto the ball. Throws std::invalid_argument on
/// non-finite input or a dimension mismatch.
Vector project_ball(std::span<const double> x, const BallDomain& dom);
/// In-place variant used inside the run loop.
void project_ball_inplace(std::span<double> x, const BallDomain& dom);

/// max(0, v).
double clip_pos(double v);

/// Subgradient of [g]_+ at x: zero where g(x) <= 0, a subgradient of g otherwise.
Vector clipped_subgrad(const ConvexFn& g, std::span<const double> x);

/// d_x f(x) + sum_i lambda_i d_x [g_i(x)]_+. Throws std::invalid_argument on
/// negative or non-finite multipliers.
Vector lagrangian_grad_x(const ConvexFn& f, std::span<const ConvexFn> gs,
                         std::span<const double> x, std::span<const double> lambda);

/// Central differences (f(x+h e_i) - f(x-h e_i)) / 2h.
Vector finite_diff_grad(const ConvexFn& f, std::span<const double> x, double h);

}  // namespace oco
