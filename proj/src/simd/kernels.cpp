#include "rds/simd/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rds::simd {

namespace scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

double sum_sq_dev(std::span<const double> a, double center) {
  double acc = 0.0;
  for (double v : a) {
    const double d = v - center;
    acc += d * d;
  }
  return acc;
}

double gaussian_kernel_sum(std::span<const double> values, double x, double inv_h) {
  double acc = 0.0;
  for (double v : values) {
    const double z = (x - v) * inv_h;
    acc += std::exp(-0.5 * z * z);
  }
  return acc;
}

}  // namespace scalar

namespace {

std::atomic<int> g_isa{-1};

Isa detect() {
  if (const char* env = std::getenv("RDS_LAB_SIMD")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
  return avx2_available() ? Isa::Avx2 : Isa::Scalar;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(RDS_HAVE_AVX2_KERNELS)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() {
  int v = g_isa.load(std::memory_order_relaxed);
  if (v < 0) {
    v = static_cast<int>(detect());
    g_isa.store(v, std::memory_order_relaxed);
  }
  return static_cast<Isa>(v);
}

void set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && !avx2_available()) {
    throw std::runtime_error("AVX2 kernels are not available on this host");
  }
  g_isa.store(static_cast<int>(isa), std::memory_order_relaxed);
}

#if defined(RDS_HAVE_AVX2_KERNELS)
#define RDS_DISPATCH(fn, ...) \
  return active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define RDS_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  RDS_DISPATCH(dot, a, b);
}

double sum(std::span<const double> a) { RDS_DISPATCH(sum, a); }

double sum_sq_dev(std::span<const double> a, double center) {
  RDS_DISPATCH(sum_sq_dev, a, center);
}

double gaussian_kernel_sum(std::span<const double> values, double x, double inv_h) {
  RDS_DISPATCH(gaussian_kernel_sum, values, x, inv_h);
}

#undef RDS_DISPATCH

}  // namespace rds::simd
