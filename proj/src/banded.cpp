#include "bsfit/banded.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsfit {

BlockBandMatrix::BlockBandMatrix(int blocks, int half_band, bool cyclic)
    : blocks_(blocks), half_band_(half_band), cyclic_(cyclic) {
  if (blocks < 1 || half_band < 0) throw std::invalid_argument("bad block band shape");
  data_.assign(static_cast<std::size_t>(blocks) * (2 * half_band + 1) * 4, 0.0);
}

std::optional<int> BlockBandMatrix::offset(int i, int j) const {
  if (!cyclic_) {
    const int d = j - i;
    if (d < -half_band_ || d > half_band_) return std::nullopt;
    return d;
  }
  if (blocks_ > 2 * half_band_) {
    const int d = (((j - i) % blocks_) + blocks_) % blocks_;
    if (d <= half_band_) return d;
    if (d >= blocks_ - half_band_) return d - blocks_;
    return std::nullopt;
  }
  // The band wraps onto itself (n <= 2w): the first representation found
  // wins so that (i, j) always maps to one slot.
  for (int d = -half_band_; d <= half_band_; ++d) {
    if ((((i + d) % blocks_) + blocks_) % blocks_ == j) return d;
  }
  return std::nullopt;
}

void BlockBandMatrix::add(int r, int c, double v) {
  const auto d = offset(r / 2, c / 2);
  if (!d) throw std::out_of_range("BlockBandMatrix::add outside the band");
  data_[index(r / 2, *d, r % 2, c % 2)] += v;
}

void BlockBandMatrix::add_block(int i, int j, double xx, double xy, double yx, double yy) {
  const auto d = offset(i, j);
  if (!d) throw std::out_of_range("BlockBandMatrix::add_block outside the band");
  double* blk = &data_[index(i, *d, 0, 0)];
  blk[0] += xx;
  blk[1] += xy;
  blk[2] += yx;
  blk[3] += yy;
}

double BlockBandMatrix::operator()(int r, int c) const {
  const auto d = offset(r / 2, c / 2);
  return d ? data_[index(r / 2, *d, r % 2, c % 2)] : 0.0;
}

double BlockBandMatrix::trace() const {
  double t = 0.0;
  for (int r = 0; r < dim(); ++r) t += (*this)(r, r);
  return t;
}

std::vector<double> BlockBandMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(dim()), 0.0);
  for (int i = 0; i < blocks_; ++i) {
    for (int d = -half_band_; d <= half_band_; ++d) {
      int j = i + d;
      if (cyclic_) {
        j = ((j % blocks_) + blocks_) % blocks_;
        if (offset(i, j) != d) continue;  // duplicate representation
      } else if (j < 0 || j >= blocks_) {
        continue;
      }
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          y[static_cast<std::size_t>(2 * i + a)] +=
              data_[index(i, d, a, b)] * x[static_cast<std::size_t>(2 * j + b)];
        }
      }
    }
  }
  return y;
}

std::vector<double> BlockBandMatrix::to_dense() const {
  const int n = dim();
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m[static_cast<std::size_t>(r) * n + c] = (*this)(r, c);
  }
  return m;
}

std::optional<std::vector<double>> solve_dense_spd(std::vector<double> a, std::span<const double> b,
                                                   int dim) {
  const auto n = static_cast<std::size_t>(dim);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0)) return std::nullopt;
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
  }
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= a[i * n + k] * x[k];
    x[i] /= a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) x[i] -= a[k * n + i] * x[k];
    x[i] /= a[i * n + i];
  }
  return x;
}

namespace {

// Lower-triangular band factor L with half-bandwidth kd, row-major band
// storage: entry (i, j), i - kd <= j <= i, at i * (kd + 1) + (j - i + kd).
class BandCholesky {
 public:
  template <class Entry>
  bool factor(int dim, int kd, Entry&& entry) {
    dim_ = dim;
    kd_ = kd;
    l_.assign(static_cast<std::size_t>(dim) * (kd + 1), 0.0);
    for (int i = 0; i < dim; ++i) {
      for (int j = std::max(0, i - kd); j <= i; ++j) {
        double s = entry(i, j);
        for (int k = std::max(0, i - kd); k < j; ++k) s -= at(i, k) * at(j, k);
        if (i == j) {
          if (!(s > 0.0)) return false;
          ref(i, i) = std::sqrt(s);
        } else {
          ref(i, j) = s / at(j, j);
        }
      }
    }
    return true;
  }

  // v <- L^{-1} v
  void forward(std::span<double> v) const {
    for (int i = 0; i < dim_; ++i) {
      double s = v[static_cast<std::size_t>(i)];
      for (int k = std::max(0, i - kd_); k < i; ++k) s -= at(i, k) * v[static_cast<std::size_t>(k)];
      v[static_cast<std::size_t>(i)] = s / at(i, i);
    }
  }

  // v <- L^{-T} v
  void backward(std::span<double> v) const {
    for (int i = dim_ - 1; i >= 0; --i) {
      double s = v[static_cast<std::size_t>(i)];
      for (int k = i + 1; k <= std::min(dim_ - 1, i + kd_); ++k) s -= at(k, i) * v[static_cast<std::size_t>(k)];
      v[static_cast<std::size_t>(i)] = s / at(i, i);
    }
  }

 private:
  double at(int i, int j) const { return l_[static_cast<std::size_t>(i) * (kd_ + 1) + (j - i + kd_)]; }
  double& ref(int i, int j) { return l_[static_cast<std::size_t>(i) * (kd_ + 1) + (j - i + kd_)]; }

  int dim_ = 0;
  int kd_ = 0;
  std::vector<double> l_;
};

}  // namespace

std::optional<std::vector<double>> solve_spd(const BlockBandMatrix& a, std::span<const double> b,
                                             double shift) {
  const int dim = a.dim();
  const int w = a.half_band();
  if (static_cast<int>(b.size()) != dim) throw std::invalid_argument("solve_spd: rhs size mismatch");
  auto entry = [&](int r, int c) { return a(r, c) + (r == c ? shift : 0.0); };
  const int kd = 2 * w + 1;

  const bool tiny = a.blocks() < 2 * w + 2;
  if (tiny) {
    std::vector<double> dense = a.to_dense();
    for (int r = 0; r < dim; ++r) dense[static_cast<std::size_t>(r) * dim + r] += shift;
    return solve_dense_spd(std::move(dense), b, dim);
  }

  if (!a.cyclic()) {
    BandCholesky chol;
    if (!chol.factor(dim, kd, entry)) return std::nullopt;
    std::vector<double> x(b.begin(), b.end());
    chol.forward(x);
    chol.backward(x);
    return x;
  }

  // Interior unknowns [0, ni) form a plain band; the last nb = 2w unknowns
  // carry the wrap-around coupling.
  const int nb = 2 * w;
  const int ni = dim - nb;
  BandCholesky chol;
  if (!chol.factor(ni, kd, entry)) return std::nullopt;

  // W = L^{-1} A_IB, stored column by column.
  std::vector<double> wmat(static_cast<std::size_t>(ni) * nb, 0.0);
  for (int c = 0; c < nb; ++c) {
    std::span<double> col(wmat.data() + static_cast<std::size_t>(c) * ni, static_cast<std::size_t>(ni));
    for (int r = 0; r < ni; ++r) col[static_cast<std::size_t>(r)] = entry(r, ni + c);
    chol.forward(col);
  }
  std::vector<double> schur(static_cast<std::size_t>(nb) * nb);
  for (int r = 0; r < nb; ++r) {
    for (int c = 0; c < nb; ++c) {
      double s = entry(ni + r, ni + c);
      const double* wr = wmat.data() + static_cast<std::size_t>(r) * ni;
      const double* wc = wmat.data() + static_cast<std::size_t>(c) * ni;
      for (int k = 0; k < ni; ++k) s -= wr[k] * wc[k];
      schur[static_cast<std::size_t>(r) * nb + c] = s;
    }
  }

  std::vector<double> x(b.begin(), b.end());
  std::span<double> xi(x.data(), static_cast<std::size_t>(ni));
  chol.forward(xi);
  std::vector<double> rhs(static_cast<std::size_t>(nb));
  for (int r = 0; r < nb; ++r) {
    double s = b[static_cast<std::size_t>(ni + r)];
    const double* wr = wmat.data() + static_cast<std::size_t>(r) * ni;
    for (int k = 0; k < ni; ++k) s -= wr[k] * xi[static_cast<std::size_t>(k)];
    rhs[static_cast<std::size_t>(r)] = s;
  }
  auto xb = solve_dense_spd(std::move(schur), rhs, nb);
  if (!xb) return std::nullopt;
  for (int k = 0; k < ni; ++k) {
    double s = 0.0;
    for (int c = 0; c < nb; ++c) s += wmat[static_cast<std::size_t>(c) * ni + k] * (*xb)[static_cast<std::size_t>(c)];
    xi[static_cast<std::size_t>(k)] -= s;
  }
  chol.backward(xi);
  for (int r = 0; r < nb; ++r) x[static_cast<std::size_t>(ni + r)] = (*xb)[static_cast<std::size_t>(r)];
  return x;
}

}  // namespace bsfit
