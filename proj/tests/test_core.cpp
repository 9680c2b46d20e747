#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oco/core.hpp"

using namespace oco;

namespace {

Vector random_point(std::mt19937_64& eng, std::size_t n, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(n);
  for (double& x : v) x = nd(eng);
  return v;
}

}  // namespace

TEST_CASE("project_ball examples") {
  const BallDomain unit(1.0, 2);
  CHECK(project_ball(Vector{0.3, 0.4}, unit) == Vector{0.3, 0.4});
  const auto p = project_ball(Vector{3.0, 4.0}, unit);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(project_ball(Vector{0.0, 0.0}, BallDomain(5.0, 2)) == Vector{0.0, 0.0});
}

TEST_CASE("project_ball rejects non-finite input and bad domains") {
  const BallDomain unit(1.0, 2);
  CHECK_THROWS_AS(project_ball(Vector{std::nan(""), 0.0}, unit), std::invalid_argument);
  CHECK_THROWS_AS(project_ball(Vector{std::numeric_limits<double>::infinity(), 0.0}, unit),
                  std::invalid_argument);
  CHECK_THROWS_AS(project_ball(Vector{1.0}, unit), std::invalid_argument);
  CHECK_THROWS_AS(BallDomain(0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(BallDomain(1.0, 0), std::invalid_argument);
}

TEST_CASE("project_ball is idempotent and nonexpansive") {
  std::mt19937_64 eng(7);
  const BallDomain dom(2.0, 5);
  for (int i = 0; i < 2000; ++i) {
    const Vector x = random_point(eng, 5, 2.0);
    const Vector y = random_point(eng, 5, 2.0);
    const Vector px = project_ball(x, dom);
    const Vector py = project_ball(y, dom);
    CHECK(norm2(px) <= dom.radius() * (1.0 + 1e-15));
    const Vector ppx = project_ball(px, dom);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(ppx[k] - px[k]) <= 1e-12);
    Vector dp(5), dxy(5);
    for (std::size_t k = 0; k < 5; ++k) {
      dp[k] = px[k] - py[k];
      dxy[k] = x[k] - y[k];
    }
    CHECK(norm2(dp) <= norm2(dxy) * (1.0 + 1e-12));
  }
}

TEST_CASE("clip_pos examples") {
  CHECK(clip_pos(-2.5) == 0.0);
  CHECK(clip_pos(0.0) == 0.0);
  CHECK(clip_pos(1.7) == 1.7);
}

TEST_CASE("clipped_subgrad examples") {
  const auto g = linear_fn({1.0, 0.0}, -1.0);
  CHECK(clipped_subgrad(g, Vector{0.0, 0.0}) == Vector{0.0, 0.0});
  CHECK(clipped_subgrad(g, Vector{2.0, 0.0}) == Vector{1.0, 0.0});
  const auto l1 = l1_norm_minus(2, 1.0);
  CHECK(clipped_subgrad(l1, Vector{0.8, 0.8}) == Vector{1.0, 1.0});
  const auto fd = finite_diff_grad(l1, Vector{0.8, 0.8}, 1e-6);
  CHECK(fd[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fd[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("l1 subgradient uses sign(0) = 0") {
  const auto l1 = l1_norm_minus(3, 1.0);
  CHECK(l1.subgrad(Vector{2.0, 0.0, -1.0}) == Vector{1.0, 0.0, -1.0});
  CHECK_FALSE(l1.smooth());
}

TEST_CASE("clipped_subgrad vanishes exactly on the feasible side") {
  std::mt19937_64 eng(11);
  const auto g = l1_norm_minus(3, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = random_point(eng, 3, 0.6);
    const auto s = clipped_subgrad(g, x);
    const bool zero = norm2(s) == 0.0;
    CHECK(zero == (g(x) <= 0.0));
  }
}

TEST_CASE("lagrangian_grad_x examples") {
  const auto f = half_squared_distance({0.0, 0.0});
  const std::vector<ConvexFn> gs{linear_fn({1.0, 0.0}, -1.0)};
  const Vector x{2.0, 0.0};
  CHECK(lagrangian_grad_x(f, gs, x, Vector{0.0}) == f.subgrad(x));
  CHECK(lagrangian_grad_x(f, gs, x, Vector{3.0}) == Vector{5.0, 0.0});
  // Feasible point: constraint terms vanish whatever lambda is.
  CHECK(lagrangian_grad_x(f, gs, Vector{0.5, 0.2}, Vector{9.0}) == Vector{0.5, 0.2});
  CHECK_THROWS_AS(lagrangian_grad_x(f, gs, x, Vector{-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(lagrangian_grad_x(f, gs, x, Vector{std::nan("")}), std::invalid_argument);
  CHECK_THROWS_AS(lagrangian_grad_x(f, gs, x, Vector{1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("lagrangian_grad_x matches finite differences of f + lambda [g]_+") {
  const auto f = half_squared_distance({0.0, 0.0});
  const auto g = linear_fn({1.0, 0.0}, -1.0);
  const double lambda = 3.0;
  const ConvexFn lag(
      2, [&](std::span<const double> x) { return f(x) + lambda * clip_pos(g(x)); },
      [](std::span<const double>, double, std::span<double>) {});
  const auto fd = finite_diff_grad(lag, Vector{2.0, 0.0}, 1e-6);
  CHECK(fd[0] == doctest::Approx(5.0).epsilon(1e-8));
  CHECK(fd[1] == doctest::Approx(0.0));
}

TEST_CASE("lagrangian_grad_x respects the G (1 + sum lambda) bound") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  const BallDomain dom(1.0, 3);
  const auto f = linear_fn({0.6, -0.8, 0.0});
  const std::vector<ConvexFn> gs{l1_norm_minus(3, 1.0), linear_fn({0.0, 0.0, 1.0}, -0.1)};
  const double G = std::sqrt(3.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = project_ball(random_point(eng, 3, 1.0), dom);
    const Vector lambda{u(eng), u(eng)};
    const auto grad = lagrangian_grad_x(f, gs, x, lambda);
    CHECK(norm2(grad) <= G * (1.0 + lambda[0] + lambda[1]) + 1e-12);
  }
}

TEST_CASE("finite_diff_grad examples") {
  const auto q = half_squared_distance({0.0, 0.0});
  const auto g = finite_diff_grad(q, Vector{1.0, 2.0}, 1e-5);
  CHECK(std::abs(g[0] - 1.0) <= 1e-6);
  CHECK(std::abs(g[1] - 2.0) <= 1e-6);

  const auto lin = linear_fn({0.3, -1.2, 2.0}, 0.5);
  const auto gl = finite_diff_grad(lin, Vector{0.1, 0.7, -0.4}, 1e-5);
  CHECK(std::abs(gl[0] - 0.3) <= 1e-9);
  CHECK(std::abs(gl[1] + 1.2) <= 1e-9);
  CHECK(std::abs(gl[2] - 2.0) <= 1e-9);

  const Vector y{0, 1, 1, 0};
  const auto frob = half_squared_distance(y);
  const auto gz = finite_diff_grad(frob, y, 1e-5);
  CHECK(norm2(gz) <= 1e-9);
  CHECK_THROWS_AS(finite_diff_grad(frob, y, 0.0), std::invalid_argument);
}

TEST_CASE("ConvexFn rejects zero dimension") {
  CHECK_THROWS_AS(ConvexFn(
                      0, [](std::span<const double>) { return 0.0; },
                      [](std::span<const double>, double, std::span<double>) {}),
                  std::invalid_argument);
}
