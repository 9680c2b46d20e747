#pragma once
// Dense double-precision vector kernels used by every inner loop of the
// online algorithms and the offline solvers.
//
// Each kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2 variant. The variant is chosen once at startup from CPUID and can be
// pinned with the OCO_KERNELS environment variable ("scalar" or "avx2") or
// set_isa(). Elementwise kernels (axpy, scale, sub) give bitwise identical
// results across variants; reductions (dot, squared_norm) differ only by
// summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace oco::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// True when the running CPU and the build both support `isa`.
bool isa_available(Isa isa);

/// Variant currently routed to by the dispatching entry points.
Isa active_isa();

/// Pins the dispatch table. Throws std::invalid_argument if `isa` is not
/// available on this machine.
void set_isa(Isa isa);

// Dispatching entry points. Sizes of paired spans must match.
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha*x
void scale(double alpha, std::span<double> x);                            // x *= alpha
void sub(std::span<const double> a, std::span<const double> b, std::span<double> out);  // out = a-b

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define OCO_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double squared_norm(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
}  // namespace avx2
#else
#define OCO_HAVE_AVX2_KERNELS 0
#endif

}  // namespace oco::kernels
