#include "bsfit/objective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bsfit {

void FitProblem::validate() const {
  if (points.empty()) throw std::invalid_argument("fit problem has no data points");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be >= 0");
  if (beta > 0.0 && topology.degree < 2) {
    throw std::invalid_argument("beta > 0 needs degree >= 2");
  }
  for (const Vec2& x : points) {
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) {
      throw std::invalid_argument("data point coordinates must be finite");
    }
  }
}

NormalizedPoints normalize_points(std::span<const Vec2> raw) {
  if (raw.empty()) throw std::invalid_argument("normalize_points: no points");
  Vec2 lo = raw.front();
  Vec2 hi = raw.front();
  for (const Vec2& p : raw) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("normalize_points: non-finite coordinate");
    }
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double width = hi.x - lo.x;
  const double height = hi.y - lo.y;
  const double side = std::max(width, height);
  if (!(side > 0.0)) throw std::invalid_argument("normalize_points: all points coincide");

  AffineTransform tf;
  tf.scale = 1.0 / side;
  // Centre the shorter axis inside [0,1].
  tf.offset = {lo.x - 0.5 * (side - width), lo.y - 0.5 * (side - height)};

  NormalizedPoints out;
  out.transform = tf;
  out.points.reserve(raw.size());
  for (const Vec2& p : raw) out.points.push_back(tf.to_unit(p));
  return out;
}

void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(count), 0.0);
  weights.assign(static_cast<std::size_t>(count), 0.0);
  for (int i = 0; i < count; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    nodes[static_cast<std::size_t>(i)] = x;
    weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

FairingGrams build_fairing_grams(const SplineBasis& basis) {
  const int n = basis.size();
  const int p = basis.degree();
  FairingGrams g;
  g.n = n;
  g.gram_d1.assign(static_cast<std::size_t>(n) * n, 0.0);
  g.gram_d2.assign(static_cast<std::size_t>(n) * n, 0.0);

  // Integrands are polynomials of degree <= 2p-2 on each span, which p nodes
  // already integrate exactly; one spare node costs nothing here.
  const int order = p + 1;
  std::vector<double> nodes;
  std::vector<double> weights;
  gauss_legendre(order, nodes, weights);

  for (int k = 0; k < basis.span_count(); ++k) {
    const auto [a, b] = basis.span_interval(k);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int q = 0; q < order; ++q) {
      const double t = mid + half * nodes[static_cast<std::size_t>(q)];
      const double w = half * weights[static_cast<std::size_t>(q)];
      const SpanEvaluation ev = basis.evaluate(t, 2);
      for (int r = 0; r <= p; ++r) {
        const int i = basis.control_index(ev.span, r);
        for (int s = 0; s <= p; ++s) {
          const int j = basis.control_index(ev.span, s);
          const auto idx = static_cast<std::size_t>(i * n + j);
          g.gram_d1[idx] += w * ev.d1[r] * ev.d1[s];
          g.gram_d2[idx] += w * ev.d2[r] * ev.d2[s];
        }
      }
    }
  }
  return g;
}

std::vector<double> pack_state(std::span<const Vec2> control_points, std::span<const double> params) {
  std::vector<double> x;
  x.reserve(2 * control_points.size() + params.size());
  for (const Vec2& c : control_points) {
    x.push_back(c.x);
    x.push_back(c.y);
  }
  x.insert(x.end(), params.begin(), params.end());
  return x;
}

std::vector<Vec2> unpack_control_points(std::span<const double> state, int n) {
  std::vector<Vec2> cps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    cps[static_cast<std::size_t>(i)] = {state[2 * static_cast<std::size_t>(i)],
                                        state[2 * static_cast<std::size_t>(i) + 1]};
  }
  return cps;
}

JointObjective::JointObjective(FitProblem problem) : problem_(std::move(problem)) {
  problem_.validate();
  basis_ = std::make_shared<const SplineBasis>(problem_.topology);
  grams_ = build_fairing_grams(*basis_);

  const int n = problem_.topology.n;
  const int p = problem_.topology.degree;
  band_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = band_[static_cast<std::size_t>(i)];
    for (int d = -p; d <= p; ++d) {
      int j = i + d;
      if (problem_.topology.closed) {
        j = ((j % n) + n) % n;
      } else if (j < 0 || j >= n) {
        continue;
      }
      const bool seen = std::any_of(row.begin(), row.end(), [j](const BandEntry& e) { return e.col == j; });
      if (!seen) row.push_back({j, grams_.d1(i, j), grams_.d2(i, j)});
    }
  }
}

void JointObjective::check_dimension(std::span<const double> state) const {
  if (state.size() != dimension()) {
    throw std::invalid_argument("state has length " + std::to_string(state.size()) +
                                ", expected " + std::to_string(dimension()));
  }
}

double JointObjective::fairing_energy(std::span<const double> cc) const {
  const double alpha = problem_.alpha;
  const double beta = problem_.beta;
  if (alpha == 0.0 && beta == 0.0) return 0.0;
  double e = 0.0;
  for (std::size_t i = 0; i < band_.size(); ++i) {
    const double xi = cc[2 * i];
    const double yi = cc[2 * i + 1];
    for (const BandEntry& b : band_[i]) {
      const auto j = static_cast<std::size_t>(b.col);
      e += (alpha * b.g1 + beta * b.g2) * (xi * cc[2 * j] + yi * cc[2 * j + 1]);
    }
  }
  return e;
}

void JointObjective::add_fairing_gradient(std::span<const double> cc, std::span<double> grad) const {
  const double alpha = problem_.alpha;
  const double beta = problem_.beta;
  if (alpha == 0.0 && beta == 0.0) return;
  for (std::size_t i = 0; i < band_.size(); ++i) {
    double gx = 0.0;
    double gy = 0.0;
    for (const BandEntry& b : band_[i]) {
      const auto j = static_cast<std::size_t>(b.col);
      const double w = 2.0 * (alpha * b.g1 + beta * b.g2);
      gx += w * cc[2 * j];
      gy += w * cc[2 * j + 1];
    }
    grad[2 * i] += gx;
    grad[2 * i + 1] += gy;
  }
}

ObjectiveParts JointObjective::evaluate(std::span<const double> state) const {
  check_dimension(state);
  const int p = basis_->degree();
  const auto n2 = 2 * static_cast<std::size_t>(control_count());
  ObjectiveParts parts;
  double sum = 0.0;
  for (std::size_t k = 0; k < problem_.points.size(); ++k) {
    const double t = state[n2 + k];
    if (!basis_->closed() && !basis_->in_domain(t)) ++parts.clamped;
    const SpanEvaluation ev = basis_->evaluate(t, 0);
    double px = 0.0;
    double py = 0.0;
    for (int r = 0; r <= p; ++r) {
      const auto c = 2 * static_cast<std::size_t>(basis_->control_index(ev.span, r));
      px += ev.basis[r] * state[c];
      py += ev.basis[r] * state[c + 1];
    }
    const double rx = px - problem_.points[k].x;
    const double ry = py - problem_.points[k].y;
    sum += rx * rx + ry * ry;
  }
  parts.data_term = 0.5 * sum;
  parts.fairing_term = fairing_energy(state.first(n2));
  parts.value = parts.data_term + parts.fairing_term;
  if (!std::isfinite(parts.value)) throw std::runtime_error("objective is not finite");
  return parts;
}

ObjectiveParts JointObjective::evaluate(std::span<const double> state, std::span<double> grad) const {
  check_dimension(state);
  if (grad.size() != state.size()) throw std::invalid_argument("gradient buffer has wrong length");
  const int p = basis_->degree();
  const auto n2 = 2 * static_cast<std::size_t>(control_count());
  std::fill(grad.begin(), grad.end(), 0.0);

  ObjectiveParts parts;
  double sum = 0.0;
  for (std::size_t k = 0; k < problem_.points.size(); ++k) {
    const double t = state[n2 + k];
    const bool inside = basis_->closed() || basis_->in_domain(t);
    if (!inside) ++parts.clamped;
    const SpanEvaluation ev = basis_->evaluate(t, 1);
    double px = 0.0, py = 0.0, dx = 0.0, dy = 0.0;
    std::array<std::size_t, kMaxDegree + 1> idx{};
    for (int r = 0; r <= p; ++r) {
      idx[r] = 2 * static_cast<std::size_t>(basis_->control_index(ev.span, r));
      const double cx = state[idx[r]];
      const double cy = state[idx[r] + 1];
      px += ev.basis[r] * cx;
      py += ev.basis[r] * cy;
      dx += ev.d1[r] * cx;
      dy += ev.d1[r] * cy;
    }
    const double rx = px - problem_.points[k].x;
    const double ry = py - problem_.points[k].y;
    sum += rx * rx + ry * ry;
    for (int r = 0; r <= p; ++r) {
      grad[idx[r]] += ev.basis[r] * rx;
      grad[idx[r] + 1] += ev.basis[r] * ry;
    }
    // A clamped parameter does not move the curve point.
    grad[n2 + k] = inside ? rx * dx + ry * dy : 0.0;
  }
  parts.data_term = 0.5 * sum;
  parts.fairing_term = fairing_energy(state.first(n2));
  add_fairing_gradient(state.first(n2), grad);
  parts.value = parts.data_term + parts.fairing_term;
  if (!std::isfinite(parts.value)) throw std::runtime_error("objective is not finite");
  return parts;
}

double JointObjective::fitting_error(std::span<const double> state) const {
  const ObjectiveParts parts = evaluate(state);
  return std::sqrt(2.0 * parts.data_term / static_cast<double>(point_count()));
}

BSplineCurve JointObjective::curve_from_state(std::span<const double> state) const {
  check_dimension(state);
  return BSplineCurve(basis_, unpack_control_points(state, control_count()));
}

double objective_value(const FitProblem& problem, std::span<const double> state) {
  return JointObjective(problem).value(state);
}

std::vector<double> objective_gradient(const FitProblem& problem, std::span<const double> state) {
  std::vector<double> g(state.size());
  JointObjective(problem).value_and_gradient(state, g);
  return g;
}

double fitting_error(const FitProblem& problem, std::span<const double> state) {
  return JointObjective(problem).fitting_error(state);
}

double rms_error(std::span<const Vec2> residuals) {
  if (residuals.empty()) return 0.0;
  double s = 0.0;
  for (const Vec2& r : residuals) s += squared_norm(r);
  return std::sqrt(s / static_cast<double>(residuals.size()));
}

}  // namespace bsfit
