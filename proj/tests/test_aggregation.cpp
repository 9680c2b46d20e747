#include <doctest.h>

#include <cmath>
#include <random>

#include "oco/aggregation.hpp"
#include "oco/problems.hpp"

using namespace oco;

namespace {

Vector sample_in_ball(std::mt19937_64& eng, std::size_t n, double R) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> u;
  Vector x(n);
  for (double& v : x) v = nd(eng);
  const double r = R * std::pow(u(eng), 1.0 / static_cast<double>(n)) / norm2(x);
  for (double& v : x) v *= r;
  return x;
}

}  // namespace

TEST_CASE("max_aggregate examples") {
  const std::vector<ConvexFn> one{linear_fn({1.0, 2.0}, -0.5)};
  const auto m1 = max_aggregate(one);
  CHECK(m1(Vector{0.3, 0.1}) == one[0](Vector{0.3, 0.1}));
  CHECK(m1.subgrad(Vector{0.3, 0.1}) == Vector{1.0, 2.0});

  const std::vector<ConvexFn> two{linear_fn({1.0, 0.0}), linear_fn({-1.0, 0.0})};
  const auto m2 = max_aggregate(two);
  CHECK(m2(Vector{2.0, 0.0}) == 2.0);
  CHECK(m2.subgrad(Vector{2.0, 0.0}) == Vector{1.0, 0.0});

  // Tie at x = 0: lowest index wins.
  CHECK(m2.subgrad(Vector{0.0, 0.0}) == Vector{1.0, 0.0});
  CHECK_THROWS_AS(max_aggregate(std::vector<ConvexFn>{}), std::invalid_argument);
}

TEST_CASE("logsumexp_aggregate examples") {
  const std::vector<ConvexFn> one{linear_fn({1.0, 2.0}, -0.5)};
  const auto l1 = logsumexp_aggregate(one);
  const Vector x{0.3, 0.1};
  CHECK(l1(x) == one[0](x));

  const std::vector<ConvexFn> dup{linear_fn({0.0, 0.0}, 0.7), linear_fn({0.0, 0.0}, 0.7)};
  CHECK(logsumexp_aggregate(dup)(x) == doctest::Approx(0.7 + std::log(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(logsumexp_aggregate(std::vector<ConvexFn>{}), std::invalid_argument);
}

TEST_CASE("logsumexp is stable for large constraint values") {
  const std::vector<ConvexFn> big{linear_fn({0.0}, 1000.0), linear_fn({0.0}, 999.0)};
  const double v = logsumexp_aggregate(big)(Vector{0.0});
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(1000.0 + std::log1p(std::exp(-1.0))));
}

TEST_CASE("logsumexp gradient matches finite differences on smooth constraints") {
  const auto p = make_problem("dispatch");
  const auto lse = logsumexp_aggregate(p.constraints);
  REQUIRE(lse.smooth());
  std::mt19937_64 eng(5);
  for (int i = 0; i < 100; ++i) {
    const Vector x = sample_in_ball(eng, 3, 0.9 * p.domain.radius());
    const auto fd = finite_diff_grad(lse, x, 1e-6 * std::max(1.0, norm2(x)));
    const auto g = lse.subgrad(x);
    Vector d(3);
    for (int k = 0; k < 3; ++k) d[k] = fd[k] - g[k];
    CHECK(norm2(d) <= 1e-5 * std::max(norm2(g), 1e-8));
  }
}

TEST_CASE("aggregate sandwich, gradient bound and sign equivalence") {
  const auto p = make_problem("doubly-stochastic");
  const auto mx = max_aggregate(p.constraints);
  const auto lse = logsumexp_aggregate(p.constraints);
  const double m = static_cast<double>(p.num_constraints());
  std::mt19937_64 eng(9);
  for (int i = 0; i < 1000; ++i) {
    const Vector x = sample_in_ball(eng, p.dim(), p.domain.radius());
    double top = -INFINITY;
    bool all_feasible = true;
    for (const auto& g : p.constraints) {
      top = std::max(top, g(x));
      all_feasible = all_feasible && g(x) <= 0.0;
    }
    const double v = lse(x);
    CHECK(top <= v + 1e-12);
    CHECK(v <= top + std::log(m) + 1e-12);
    CHECK(norm2(lse.subgrad(x)) <= std::sqrt(m) * p.G + 1e-12);
    CHECK((mx(x) <= 0.0) == all_feasible);
  }
}

TEST_CASE("aggregate dispatches on mode") {
  const std::vector<ConvexFn> two{linear_fn({1.0}), linear_fn({-1.0})};
  CHECK(aggregate(two, AggregateMode::max)(Vector{0.5}) == 0.5);
  CHECK(aggregate(two, AggregateMode::logsumexp)(Vector{0.0}) == doctest::Approx(std::log(2.0)));
  CHECK(to_string(AggregateMode::logsumexp) == "logsumexp");
}
