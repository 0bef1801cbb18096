#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "bsfit/objective.hpp"
#include "support/oracles.hpp"

using namespace bsfit;

TEST_CASE("normalize_points") {
  SUBCASE("square box") {
    const std::vector<Vec2> raw{{0, 0}, {10, 0}, {10, 10}};
    const auto n = normalize_points(raw);
    CHECK(n.transform.scale == doctest::Approx(0.1));
    CHECK(n.points[0] == Vec2{0, 0});
    CHECK(n.points[1] == Vec2{1, 0});
    CHECK(n.points[2] == Vec2{1, 1});
  }
  SUBCASE("aspect preserved, short axis centred") {
    const std::vector<Vec2> raw{{0, 0}, {2, 1}};
    const auto n = normalize_points(raw);
    CHECK(n.points[0].x == doctest::Approx(0.0));
    CHECK(n.points[0].y == doctest::Approx(0.25));
    CHECK(n.points[1].x == doctest::Approx(1.0));
    CHECK(n.points[1].y == doctest::Approx(0.75));
    const Vec2 back = n.transform.to_raw(n.points[1]);
    CHECK(back.x == doctest::Approx(2.0));
    CHECK(back.y == doctest::Approx(1.0));
  }
  SUBCASE("degenerate") {
    const std::vector<Vec2> raw{{3, 3}, {3, 3}};
    CHECK_THROWS_AS(normalize_points(raw), std::invalid_argument);
    CHECK_THROWS_AS(normalize_points(std::vector<Vec2>{}), std::invalid_argument);
  }
}

TEST_CASE("fairing grams") {
  SUBCASE("degree-1 two-point open curve") {
    const FairingGrams g = build_fairing_grams(SplineBasis({2, 1, false}));
    CHECK(g.d1(0, 0) == doctest::Approx(1.0));
    CHECK(g.d1(0, 1) == doctest::Approx(-1.0));
    CHECK(g.d1(1, 0) == doctest::Approx(-1.0));
    CHECK(g.d1(1, 1) == doctest::Approx(1.0));
    CHECK(g.d2(0, 0) == 0.0);
  }
  SUBCASE("row sums vanish, symmetry, band structure, PSD") {
    for (const bool closed : {true, false}) {
      for (int p = 1; p <= 4; ++p) {
        const int n = p + 6;
        const FairingGrams g = build_fairing_grams(SplineBasis({n, p, closed}));
        Eigen::MatrixXd m1(n, n), m2(n, n);
        for (int i = 0; i < n; ++i) {
          double r1 = 0.0, r2 = 0.0;
          for (int j = 0; j < n; ++j) {
            r1 += g.d1(i, j);
            r2 += g.d2(i, j);
            m1(i, j) = g.d1(i, j);
            m2(i, j) = g.d2(i, j);
            CHECK(g.d1(i, j) == doctest::Approx(g.d1(j, i)).epsilon(1e-13));
            int dist = std::abs(i - j);
            if (closed) dist = std::min(dist, n - dist);
            if (dist > p) {
              CHECK(g.d1(i, j) == 0.0);
              CHECK(g.d2(i, j) == 0.0);
            }
          }
          CHECK(std::fabs(r1) < 1e-9);
          CHECK(std::fabs(r2) < 1e-6);
        }
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(m1), e2(m2);
        CHECK(e1.eigenvalues().minCoeff() > -1e-9 * e1.eigenvalues().maxCoeff());
        if (p >= 2) CHECK(e2.eigenvalues().minCoeff() > -1e-9 * e2.eigenvalues().maxCoeff());
      }
    }
  }
  SUBCASE("quadratic form matches a dense trapezoid integral") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int n = 9;
    std::vector<Vec2> pts(n);
    for (Vec2& p : pts) p = {u(rng), u(rng)};
    const BSplineCurve c = make_uniform_curve(n, 3, true, pts);
    const FairingGrams g = build_fairing_grams(c.basis());
    double q1 = 0.0, q2 = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        q1 += g.d1(i, j) * dot(pts[i], pts[j]);
        q2 += g.d2(i, j) * dot(pts[i], pts[j]);
      }
    }
    const int m = 100000;
    double i1 = 0.0, i2 = 0.0;
    for (int k = 0; k < m; ++k) {  // periodic trapezoid: every node weight 1/m
      const CurveJet j = c.evaluate_jet(static_cast<double>(k) / m);
      i1 += squared_norm(j.d1) / m;
      i2 += squared_norm(j.d2) / m;
    }
    CHECK(std::fabs(q1 - i1) / i1 < 1e-6);
    CHECK(std::fabs(q2 - i2) / i2 < 1e-6);
  }
}

TEST_CASE("objective value examples") {
  FitProblem pr;
  pr.topology = {4, 3, false};
  // Constant curve at (3,4), one data point at the origin.
  pr.points = {{0, 0}};
  const std::vector<Vec2> ctrl(4, Vec2{3, 4});
  const std::vector<double> t{0.5};
  const auto state = pack_state(ctrl, t);
  CHECK(objective_value(pr, state) == doctest::Approx(12.5));
  CHECK(fitting_error(pr, state) == doctest::Approx(5.0));

  // Data lying on the curve: zero value and zero gradient.
  const BSplineCurve c = make_uniform_curve(4, 3, false, {{0, 0}, {1, 2}, {2, 1}, {3, 3}});
  FitProblem on;
  on.topology = c.topology();
  std::vector<double> ts{0.0, 0.2, 0.5, 0.77, 1.0};
  for (double s : ts) on.points.push_back(c.evaluate(s));
  const auto st = pack_state(c.control_points(), ts);
  CHECK(objective_value(on, st) == doctest::Approx(0.0).scale(1.0));
  const auto g = objective_gradient(on, st);
  for (double v : g) CHECK(std::fabs(v) < 1e-14);
  CHECK(fitting_error(on, st) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("rms error examples") {
  const std::vector<Vec2> one{{3, 4}};
  CHECK(rms_error(one) == doctest::Approx(5.0));
  const std::vector<Vec2> four{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  CHECK(rms_error(four) == doctest::Approx(1.0));
  CHECK(rms_error(std::vector<Vec2>{{0, 0}, {0, 0}}) == 0.0);
}

TEST_CASE("orthogonal residual gives a zero parameter gradient") {
  // Straight horizontal segment; the point sits straight above P(0.5).
  const BSplineCurve c = make_uniform_curve(4, 3, false, {{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  FitProblem pr;
  pr.topology = c.topology();
  pr.points = {c.evaluate(0.5) + Vec2{0, 1}};
  const auto g = objective_gradient(pr, pack_state(c.control_points(), std::vector<double>{0.5}));
  CHECK(g.back() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("objective matches a naive re-implementation") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = oracle::random_instance(rng, 6, 20, 20, 80);
    const JointObjective obj(inst.problem);
    const int n = inst.problem.topology.n;
    // The gram form itself is checked against a trapezoid integral above.
    const double naive_data = oracle::data_term(inst.problem, inst.state);
    const ObjectiveParts parts = obj.evaluate(inst.state);
    CHECK(std::fabs(parts.data_term - naive_data) <= 1e-12 * naive_data);
    const double fair = obj.fairing_energy(std::span<const double>(inst.state).first(2 * static_cast<std::size_t>(n)));
    CHECK(parts.value == doctest::Approx(naive_data + fair).epsilon(1e-12));
    CHECK(parts.value >= 0.0);
  }
}

TEST_CASE("gradient matches central differences") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = oracle::random_instance(rng);
    const JointObjective obj(inst.problem);
    std::vector<double> g(inst.state.size());
    obj.evaluate(inst.state, g);
    double worst = 0.0;
    auto x = inst.state;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double h = 1e-6;
      const double x0 = x[i];
      x[i] = x0 + h;
      const double fp = obj.value(x);
      x[i] = x0 - h;
      const double fm = obj.value(x);
      x[i] = x0;
      worst = std::max(worst, std::fabs((fp - fm) / (2 * h) - g[i]));
    }
    CAPTURE(trial);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("objective properties") {
  std::mt19937_64 rng(51);
  auto inst = oracle::random_instance(rng, 8, 8, 60, 60, false);
  const JointObjective obj(inst.problem);
  const int n = inst.problem.topology.n;
  const auto k = inst.problem.points.size();

  SUBCASE("f = N E^2 / 2 without fairing") {
    const double e = obj.fitting_error(inst.state);
    CHECK(obj.value(inst.state) == doctest::Approx(0.5 * static_cast<double>(k) * e * e).epsilon(1e-13));
  }
  SUBCASE("permutation symmetry") {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    FitProblem pr = inst.problem;
    auto st = inst.state;
    for (std::size_t i = 0; i < k; ++i) {
      pr.points[i] = inst.problem.points[perm[i]];
      st[2 * static_cast<std::size_t>(n) + i] = inst.state[2 * static_cast<std::size_t>(n) + perm[i]];
    }
    CHECK(objective_value(pr, st) == doctest::Approx(obj.value(inst.state)).epsilon(1e-13));
  }
  SUBCASE("fairing is translation invariant") {
    FitProblem pr = inst.problem;
    pr.alpha = 0.3;
    pr.beta = 0.05;
    const JointObjective fo(pr);
    std::vector<double> c(inst.state.begin(), inst.state.begin() + 2 * n);
    const double before = fo.fairing_energy(c);
    for (int i = 0; i < n; ++i) {
      c[2 * static_cast<std::size_t>(i)] += 4.0;
      c[2 * static_cast<std::size_t>(i) + 1] -= 2.5;
    }
    CHECK(fo.fairing_energy(c) == doctest::Approx(before).epsilon(1e-9));
  }
}

TEST_CASE("problem validation and non-finite states") {
  FitProblem pr;
  pr.topology = {6, 3, true};
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);  // no points
  pr.points = {{0.5, 0.5}};
  pr.alpha = -1.0;
  CHECK_THROWS_AS(pr.validate(), std::invalid_argument);
  pr.alpha = 0.0;
  CHECK_NOTHROW(pr.validate());

  const JointObjective obj(pr);
  std::vector<double> st(obj.dimension(), 0.1);
  CHECK_THROWS_AS(obj.value(std::vector<double>(3)), std::invalid_argument);
  st[0] = NAN;
  std::vector<double> g(st.size());
  CHECK_THROWS_AS(obj.evaluate(st, g), std::runtime_error);
}

TEST_CASE("open curves clamp out-of-range parameters") {
  FitProblem pr;
  pr.topology = {5, 3, false};
  pr.points = {{0.2, 0.3}, {0.9, 0.1}};
  const JointObjective obj(pr);
  std::vector<double> st{0, 0, 0.2, 0.5, 0.5, 0.9, 0.8, 0.4, 1, 1, -0.3, 1.2};
  std::vector<double> g(st.size());
  const ObjectiveParts parts = obj.evaluate(st, g);
  CHECK(parts.clamped == 2);
  CHECK(g[10] == 0.0);
  CHECK(g[11] == 0.0);
  auto inside = st;
  inside[10] = 0.0;
  inside[11] = 1.0;
  CHECK(obj.value(inside) == obj.value(st));
}
