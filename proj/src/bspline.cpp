#include "bsfit/bspline.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bsfit {

namespace {

void check_topology(const CurveTopology& topo) {
  if (topo.degree < 1 || topo.degree > kMaxDegree) {
    throw std::invalid_argument("degree must be in [1, " + std::to_string(kMaxDegree) +
                                "], got " + std::to_string(topo.degree));
  }
  if (topo.n < topo.degree + 1) {
    throw std::invalid_argument("need at least degree+1 control points, got n=" +
                                std::to_string(topo.n));
  }
}

}  // namespace

SplineBasis::SplineBasis(CurveTopology topology) : topology_(topology) {
  check_topology(topology_);
  const int n = topology_.n;
  const int p = topology_.degree;
  if (topology_.closed) {
    basis_count_ = n + p;
    knots_.resize(static_cast<std::size_t>(n + 2 * p + 1));
    for (int i = 0; i < n + 2 * p + 1; ++i) {
      knots_[static_cast<std::size_t>(i)] = static_cast<double>(i - p) / n;
    }
    // Pin the domain ends exactly.
    knots_[static_cast<std::size_t>(p)] = 0.0;
    knots_[static_cast<std::size_t>(n + p)] = 1.0;
  } else {
    basis_count_ = n;
    const int spans = n - p;
    knots_.assign(static_cast<std::size_t>(n + p + 1), 0.0);
    for (int i = 1; i < spans; ++i) {
      knots_[static_cast<std::size_t>(p + i)] = static_cast<double>(i) / spans;
    }
    for (int i = n; i < n + p + 1; ++i) knots_[static_cast<std::size_t>(i)] = 1.0;
  }
}

std::pair<double, double> SplineBasis::span_interval(int k) const {
  const auto j = static_cast<std::size_t>(topology_.degree + k);
  return {knots_[j], knots_[j + 1]};
}

double SplineBasis::to_domain(double t) const {
  if (topology_.closed) {
    double u = t - std::floor(t);
    if (u >= 1.0) u = 0.0;  // t slightly below an integer
    return u;
  }
  return std::clamp(t, 0.0, 1.0);
}

int SplineBasis::find_span(double u) const {
  const int p = topology_.degree;
  const auto first = knots_.begin() + p + 1;
  const auto last = knots_.begin() + basis_count_;
  const auto it = std::upper_bound(first, last, u);
  return static_cast<int>(it - knots_.begin()) - 1;
}

// Basis functions and derivatives on one span (the triangular Cox-de Boor
// table, derivatives via the usual difference recurrences).
SpanEvaluation SplineBasis::evaluate(double t, int order) const {
  const int p = topology_.degree;
  const double u = to_domain(t);
  SpanEvaluation out;
  out.span = find_span(u);
  const int span = out.span;
  const double* U = knots_.data();

  std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> ndu{};
  std::array<double, kMaxDegree + 1> left{};
  std::array<double, kMaxDegree + 1> right{};
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];  // lower triangle: knot differences
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) out.basis[j] = ndu[j][p];
  if (order <= 0) return out;

  const int top = std::min(order, p);
  std::array<std::array<double, kMaxDegree + 1>, 2> a{};
  for (int r = 0; r <= p; ++r) {
    int s1 = 0;
    int s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      if (k == 1) {
        out.d1[r] = d;
      } else {
        out.d2[r] = d;
      }
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int r = 0; r <= p; ++r) out.d1[r] *= factor;
  if (top >= 2) {
    factor *= (p - 1);
    for (int r = 0; r <= p; ++r) out.d2[r] *= factor;
  }
  return out;
}

BSplineCurve::BSplineCurve(CurveTopology topology, std::vector<Vec2> control_points)
    : BSplineCurve(std::make_shared<const SplineBasis>(topology), std::move(control_points)) {}

BSplineCurve::BSplineCurve(std::shared_ptr<const SplineBasis> basis,
                           std::vector<Vec2> control_points)
    : basis_(std::move(basis)), control_points_(std::move(control_points)) {
  if (!basis_) throw std::invalid_argument("null spline basis");
  if (static_cast<int>(control_points_.size()) != basis_->size()) {
    throw std::invalid_argument("expected " + std::to_string(basis_->size()) +
                                " control points, got " +
                                std::to_string(control_points_.size()));
  }
  for (const Vec2& c : control_points_) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y)) {
      throw std::invalid_argument("control point coordinates must be finite");
    }
  }
}

Vec2 BSplineCurve::evaluate(double t) const {
  const SpanEvaluation ev = basis_->evaluate(t, 0);
  Vec2 p;
  for (int i = 0; i <= degree(); ++i) {
    p += ev.basis[i] * control_points_[basis_->control_index(ev.span, i)];
  }
  return p;
}

CurveJet BSplineCurve::evaluate_d1(double t) const {
  const SpanEvaluation ev = basis_->evaluate(t, 1);
  CurveJet jet;
  for (int i = 0; i <= degree(); ++i) {
    const Vec2 c = control_points_[basis_->control_index(ev.span, i)];
    jet.point += ev.basis[i] * c;
    jet.d1 += ev.d1[i] * c;
  }
  return jet;
}

CurveJet BSplineCurve::evaluate_jet(double t) const {
  if (degree() < 2) {
    throw std::invalid_argument("second derivative requested on a degree-1 curve");
  }
  const SpanEvaluation ev = basis_->evaluate(t, 2);
  CurveJet jet;
  for (int i = 0; i <= degree(); ++i) {
    const Vec2 c = control_points_[basis_->control_index(ev.span, i)];
    jet.point += ev.basis[i] * c;
    jet.d1 += ev.d1[i] * c;
    jet.d2 += ev.d2[i] * c;
  }
  return jet;
}

BSplineCurve make_uniform_curve(int n, int degree, bool closed, std::vector<Vec2> init_points) {
  if (static_cast<int>(init_points.size()) != n) {
    throw std::invalid_argument("init_points must hold exactly n points");
  }
  return BSplineCurve(CurveTopology{n, degree, closed}, std::move(init_points));
}

}  // namespace bsfit
