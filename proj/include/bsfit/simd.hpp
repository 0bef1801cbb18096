#pragma once

// Vector kernels used by the inner loops of the fitters.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2 variant is compiled into the same binary and chosen at runtime when
// the CPU supports it. Setting BSFIT_SIMD=scalar in the environment forces the
// reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace bsfit::simd {

/// Index and squared distance of the sample closest to a query point.
struct NearestSample {
  std::size_t index = 0;
  double squared_distance = 0.0;
};

/// Function table for one instruction-set level.
struct Kernels {
  std::string_view name;

  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out = x + alpha * p
  void (*step)(const double* x, double alpha, const double* p, double* out, std::size_t n);
  // x *= alpha
  void (*scale)(double alpha, double* x, std::size_t n);
  double (*inf_norm)(const double* x, std::size_t n);
  // Ties resolve to the lowest index. n must be > 0.
  NearestSample (*nearest)(const double* xs, const double* ys, std::size_t n,
                           double qx, double qy);
};

const Kernels& scalar_kernels();

/// The AVX2 table, or nullptr when it was not compiled in or the CPU lacks
/// AVX2/FMA.
const Kernels* avx2_kernels();

/// The table selected for this process.
const Kernels& active();

// Convenience wrappers over active().

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void step(std::span<const double> x, double alpha, std::span<const double> p,
                 std::span<double> out) {
  active().step(x.data(), alpha, p.data(), out.data(), x.size());
}

inline void scale(double alpha, std::span<double> x) {
  active().scale(alpha, x.data(), x.size());
}

inline double inf_norm(std::span<const double> x) {
  return active().inf_norm(x.data(), x.size());
}

inline NearestSample nearest(std::span<const double> xs, std::span<const double> ys,
                             double qx, double qy) {
  return active().nearest(xs.data(), ys.data(), xs.size(), qx, qy);
}

}  // namespace bsfit::simd
