#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <vector>

#include "oco/kernels.hpp"

namespace k = oco::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& eng, std::size_t n) {
  std::normal_distribution<double> nd(0.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = nd(eng);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernels on small inputs") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, -5, 6};
  CHECK(k::scalar::dot(a.data(), b.data(), 3) == doctest::Approx(12.0));
  CHECK(k::scalar::squared_norm(a.data(), 3) == doctest::Approx(14.0));
  std::vector<double> y{1, 1, 1};
  k::scalar::axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{3, 5, 7});
  k::scalar::scale(0.5, y.data(), 3);
  CHECK(y == std::vector<double>{1.5, 2.5, 3.5});
  std::vector<double> out(3);
  k::scalar::sub(a.data(), b.data(), out.data(), 3);
  CHECK(out == std::vector<double>{-3, 7, -3});
}

TEST_CASE("dispatching entry points reject mismatched spans") {
  std::vector<double> a(3), b(4);
  CHECK_THROWS_AS(k::dot(a, b), std::invalid_argument);
  CHECK_THROWS_AS(k::axpy(1.0, a, b), std::invalid_argument);
}

#if OCO_HAVE_AVX2_KERNELS
TEST_CASE("avx2 kernels match the scalar reference") {
  if (!k::isa_available(k::Isa::avx2)) {
    MESSAGE("avx2 not available; skipping equivalence");
    return;
  }
  std::mt19937_64 eng(42);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 25u, 31u, 100u, 1023u}) {
    CAPTURE(n);
    const auto a = random_vec(eng, n);
    const auto b = random_vec(eng, n);

    const double ds = k::scalar::dot(a.data(), b.data(), n);
    const double dv = k::avx2::dot(a.data(), b.data(), n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(ds - dv) <= 1e-14 * std::max(1.0, mag));

    const double ns = k::scalar::squared_norm(a.data(), n);
    const double nv = k::avx2::squared_norm(a.data(), n);
    CHECK(std::abs(ns - nv) <= 1e-14 * std::max(1.0, ns));

    auto ys = b;
    auto yv = b;
    k::scalar::axpy(-0.37, a.data(), ys.data(), n);
    k::avx2::axpy(-0.37, a.data(), yv.data(), n);
    CHECK(same_bits(ys, yv));

    auto ss = a;
    auto sv = a;
    k::scalar::scale(1.7, ss.data(), n);
    k::avx2::scale(1.7, sv.data(), n);
    CHECK(same_bits(ss, sv));

    std::vector<double> os(n), ov(n);
    k::scalar::sub(a.data(), b.data(), os.data(), n);
    k::avx2::sub(a.data(), b.data(), ov.data(), n);
    CHECK(same_bits(os, ov));
  }
}
#endif

TEST_CASE("set_isa pins the dispatch table") {
  const auto before = k::active_isa();
  k::set_isa(k::Isa::scalar);
  CHECK(k::active_isa() == k::Isa::scalar);
  CHECK(k::isa_name(k::Isa::scalar) == "scalar");
  if (k::isa_available(k::Isa::avx2)) {
    k::set_isa(k::Isa::avx2);
    CHECK(k::active_isa() == k::Isa::avx2);
  }
  k::set_isa(before);
}
