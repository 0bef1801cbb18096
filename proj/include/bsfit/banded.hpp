#pragma once

#include <optional>
#include <span>
#include <vector>

namespace bsfit {

/// Symmetric matrix made of n x n blocks of size 2x2 where block (i, j) is
/// non-zero only when the (cyclic, if enabled) distance |i - j| <= half_band.
///
/// This is the structure of the control-point normal equations of a degree-p
/// spline with interleaved (x, y) coordinates: half_band = p, cyclic for
/// closed curves.
class BlockBandMatrix {
 public:
  BlockBandMatrix() = default;
  BlockBandMatrix(int blocks, int half_band, bool cyclic);

  int blocks() const { return blocks_; }
  int dim() const { return 2 * blocks_; }
  int half_band() const { return half_band_; }
  bool cyclic() const { return cyclic_; }

  /// Block offset in [-w, w] used to store block (i, j), or nullopt when the
  /// block is structurally zero.
  std::optional<int> offset(int i, int j) const;

  /// Adds v to scalar entry (r, c). The entry must lie inside the band.
  void add(int r, int c, double v);
  /// Adds the 2x2 block [[xx, xy], [yx, yy]] to block (i, j).
  void add_block(int i, int j, double xx, double xy, double yx, double yy);
  double operator()(int r, int c) const;

  double trace() const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> to_dense() const;  // row-major dim x dim

 private:
  std::size_t index(int i, int d, int a, int b) const {
    return ((static_cast<std::size_t>(i) * (2 * half_band_ + 1) + (d + half_band_)) * 2 + a) * 2 + b;
  }

  int blocks_ = 0;
  int half_band_ = 0;
  bool cyclic_ = false;
  std::vector<double> data_;
};

/// Solves (A + shift I) x = b for symmetric positive definite A.
///
/// Non-cyclic matrices use a banded Cholesky factorization. Cyclic matrices
/// factor the banded interior and eliminate the 2w corner unknowns through a
/// dense Schur complement. Small systems fall back to dense Cholesky.
/// Returns nullopt when the matrix is not numerically positive definite.
std::optional<std::vector<double>> solve_spd(const BlockBandMatrix& a, std::span<const double> b,
                                             double shift = 0.0);

/// Dense Cholesky solve of a row-major SPD matrix; nullopt on failure.
std::optional<std::vector<double>> solve_dense_spd(std::vector<double> a, std::span<const double> b,
                                                   int dim);

}  // namespace bsfit
