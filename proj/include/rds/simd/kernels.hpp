#pragma once

// Data-parallel inner loops used by the estimators and the density
// estimates. Each kernel has a scalar reference implementation and, on
// x86-64 hosts with AVX2+FMA, a vectorized variant selected once at runtime.
// The variants reorder floating-point sums, so they agree with the scalar
// reference to rounding, not bit-for-bit.

#include <cstddef>
#include <span>
#include <string_view>

namespace rds::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// ISA used by the dispatched entry points below. Chosen on first call from
// the CPU features; setting RDS_LAB_SIMD=scalar forces the reference path.
Isa active_isa();

// True if the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

// Overrides the dispatch choice (tests and benchmarks). Throws if the
// requested ISA is unavailable.
void set_active_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
// Σ (a_i - center)^2
double sum_sq_dev(std::span<const double> a, double center);
// Σ exp(-0.5 * ((x - v_i) * inv_h)^2)
double gaussian_kernel_sum(std::span<const double> values, double x, double inv_h);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sum_sq_dev(std::span<const double> a, double center);
double gaussian_kernel_sum(std::span<const double> values, double x, double inv_h);
}  // namespace scalar

#if defined(RDS_HAVE_AVX2_KERNELS)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sum_sq_dev(std::span<const double> a, double center);
double gaussian_kernel_sum(std::span<const double> values, double x, double inv_h);
}  // namespace avx2
#endif

}  // namespace rds::simd
