#include <doctest.h>

#include <Eigen/Dense>

#include <random>
#include <stdexcept>
#include <vector>

#include "bsfit/banded.hpp"

using namespace bsfit;

namespace {

// Random SPD matrix with the block-band pattern: B^T B plus a diagonal, with
// B sharing the band so the product stays inside it.
BlockBandMatrix random_spd(std::mt19937_64& rng, int blocks, int w, bool cyclic) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BlockBandMatrix a(blocks, w, cyclic);
  for (int i = 0; i < blocks; ++i) {
    for (int j = 0; j < blocks; ++j) {
      if (!a.offset(i, j) || j < i) continue;
      const double xx = u(rng), xy = u(rng), yy = u(rng);
      if (i == j) {
        a.add_block(i, j, xx + 4.0 * w + 4.0, xy, xy, yy + 4.0 * w + 4.0);
      } else {
        const double yx = u(rng);
        a.add_block(i, j, xx, xy, yx, yy);
        a.add_block(j, i, xx, yx, xy, yy);
      }
    }
  }
  return a;
}

Eigen::MatrixXd dense(const BlockBandMatrix& a) {
  const std::vector<double> d = a.to_dense();
  Eigen::MatrixXd m(a.dim(), a.dim());
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) m(r, c) = d[static_cast<std::size_t>(r * a.dim() + c)];
  return m;
}

Eigen::VectorXd random_rhs(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd b(dim);
  for (int i = 0; i < dim; ++i) b(i) = g(rng);
  return b;
}

}  // namespace

TEST_CASE("band structure") {
  BlockBandMatrix open(6, 2, false);
  CHECK(open.dim() == 12);
  CHECK(open.offset(0, 2).has_value());
  CHECK_FALSE(open.offset(0, 3).has_value());
  CHECK_FALSE(open.offset(0, 5).has_value());
  BlockBandMatrix cyc(6, 2, true);
  CHECK(cyc.offset(0, 5) == -1);
  CHECK(cyc.offset(5, 0) == 1);
  CHECK(cyc.offset(0, 4) == -2);
  CHECK_FALSE(cyc.offset(0, 3).has_value());
  CHECK_THROWS(cyc.add(0, 6, 1.0));
}

TEST_CASE("element access, trace and product agree with the dense copy") {
  std::mt19937_64 rng(3);
  for (const bool cyclic : {false, true}) {
    const BlockBandMatrix a = random_spd(rng, 9, 3, cyclic);
    const Eigen::MatrixXd m = dense(a);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.trace() == doctest::Approx(m.trace()).epsilon(1e-14));
    const Eigen::VectorXd x = random_rhs(rng, a.dim());
    const std::vector<double> ax = a.multiply({x.data(), static_cast<std::size_t>(x.size())});
    const Eigen::VectorXd ref = m * x;
    for (int i = 0; i < a.dim(); ++i) CHECK(ax[static_cast<std::size_t>(i)] == doctest::Approx(ref(i)).epsilon(1e-13));
    CHECK(a(3, 4) == m(3, 4));
  }
}

TEST_CASE("banded and cyclic solves match a dense factorization") {
  std::mt19937_64 rng(5);
  struct Case {
    int blocks, w;
    bool cyclic;
  };
  const std::vector<Case> cases{{4, 1, false}, {5, 2, true},  {7, 3, true},  {8, 3, true},
                                {30, 3, true}, {30, 3, false}, {64, 4, true}, {100, 2, false},
                                {13, 5, true}, {200, 3, true}, {4, 3, true}, {4, 2, true}, {3, 2, true}};
  for (const Case& c : cases) {
    CAPTURE(c.blocks);
    CAPTURE(c.cyclic);
    const BlockBandMatrix a = random_spd(rng, c.blocks, c.w, c.cyclic);
    const Eigen::MatrixXd m = dense(a);
    const Eigen::VectorXd b = random_rhs(rng, a.dim());
    for (const double shift : {0.0, 0.5}) {
      const auto x = solve_spd(a, {b.data(), static_cast<std::size_t>(b.size())}, shift);
      REQUIRE(x.has_value());
      const Eigen::MatrixXd ms = m + shift * Eigen::MatrixXd::Identity(a.dim(), a.dim());
      const Eigen::VectorXd ref = ms.llt().solve(b);
      const Eigen::Map<const Eigen::VectorXd> xv(x->data(), a.dim());
      CHECK((xv - ref).norm() <= 1e-10 * ref.norm());
    }
  }
}

TEST_CASE("indefinite systems are reported") {
  BlockBandMatrix a(6, 1, true);
  for (int i = 0; i < 6; ++i) a.add_block(i, i, 1.0, 0.0, 0.0, 1.0);
  a.add_block(2, 2, -5.0, 0.0, 0.0, 0.0);
  const std::vector<double> b(12, 1.0);
  CHECK_FALSE(solve_spd(a, b).has_value());
  BlockBandMatrix big(40, 2, false);
  for (int i = 0; i < 40; ++i) big.add_block(i, i, 1.0, 0.0, 0.0, i == 30 ? -1.0 : 1.0);
  CHECK_FALSE(solve_spd(big, std::vector<double>(80, 1.0)).has_value());
  CHECK_FALSE(solve_dense_spd({1.0, 2.0, 2.0, 1.0}, std::vector<double>{1.0, 1.0}, 2).has_value());
}

TEST_CASE("dense solve example") {
  const auto x = solve_dense_spd({4.0, 2.0, 2.0, 3.0}, std::vector<double>{2.0, 1.0}, 2);
  REQUIRE(x.has_value());
  CHECK((*x)[0] == doctest::Approx(0.5));
  CHECK((*x)[1] == doctest::Approx(0.0).epsilon(1e-15));
}
