#include "bsfit/simd.hpp"

#include <cmath>

namespace bsfit::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void step_scalar(const double* x, double alpha, const double* p, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + alpha * p[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double inf_norm_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::fabs(x[i]);
    if (a > m || std::isnan(a)) m = a;
    if (std::isnan(m)) return m;
  }
  return m;
}

NearestSample nearest_scalar(const double* xs, const double* ys, std::size_t n,
                             double qx, double qy) {
  NearestSample best{0, INFINITY};
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best.squared_distance) best = {i, d2};
  }
  return best;
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table{"scalar",      dot_scalar,      axpy_scalar, step_scalar,
                             scale_scalar, inf_norm_scalar, nearest_scalar};
  return table;
}

}  // namespace bsfit::simd
