#include <cstdlib>
#include <stdexcept>
#include <string>

#include "oco/kernels.hpp"

namespace oco::kernels {

namespace {

struct Table {
  Isa isa;
  double (*dot)(const double*, const double*, std::size_t);
  double (*squared_norm)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*sub)(const double*, const double*, double*, std::size_t);
};

constexpr Table kScalar{Isa::scalar, scalar::dot, scalar::squared_norm, scalar::axpy,
                        scalar::scale, scalar::sub};
#if OCO_HAVE_AVX2_KERNELS
constexpr Table kAvx2{Isa::avx2, avx2::dot, avx2::squared_norm, avx2::axpy, avx2::scale,
                      avx2::sub};
#endif

bool cpu_has_avx2() {
#if OCO_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Table& table_for(Isa isa) {
#if OCO_HAVE_AVX2_KERNELS
  if (isa == Isa::avx2) return kAvx2;
#endif
  return kScalar;
}

Isa initial_isa() {
  if (const char* env = std::getenv("OCO_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

const Table*& current() {
  static const Table* t = &table_for(initial_isa());
  return t;
}

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernels: span size mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current()->isa; }

void set_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("kernels: " + std::string(isa_name(isa)) + " not available");
  }
  current() = &table_for(isa);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size());
  return current()->dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) {
  return current()->squared_norm(a.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  current()->axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { current()->scale(alpha, x.data(), x.size()); }

void sub(std::span<const double> a, std::span<const double> b, std::span<double> out) {
  check_same(a.size(), b.size());
  check_same(a.size(), out.size());
  current()->sub(a.data(), b.data(), out.data(), a.size());
}

}  // namespace oco::kernels
