#include "bsfit/footpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsfit/simd.hpp"

namespace bsfit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct Probe {
  double t;
  Vec2 r;      // X - P(t)
  Vec2 d1;     // P'(t)
  Vec2 dd;     // P''(t)
  double d2;   // |X - P(t)|^2
  double res;  // (X - P) . P'
};

Probe probe(const BSplineCurve& curve, Vec2 x, double t) {
  const CurveJet jet = curve.degree() > 1 ? curve.evaluate_jet(t) : curve.evaluate_d1(t);
  const Vec2 r = x - jet.point;
  return {t, r, jet.d1, jet.d2, squared_norm(r), dot(r, jet.d1)};
}

FootpointResult golden_section(const BSplineCurve& curve, Vec2 x, double t,
                               const ProjectionOptions& options) {
  const SplineBasis& basis = curve.basis();
  const int span = basis.find_span(basis.to_domain(t));
  const auto knots = basis.knots();
  double a = knots[static_cast<std::size_t>(span)];
  double b = knots[static_cast<std::size_t>(span) + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto dist2 = [&](double u) { return squared_norm(x - curve.evaluate(u)); };
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = dist2(c);
  double fd = dist2(d);
  int it = 0;
  for (; it < options.max_iterations && (b - a) > 1e-15; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = dist2(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = dist2(d);
    }
  }
  const Probe pr = probe(curve, x, basis.to_domain(0.5 * (a + b)));
  FootpointResult out;
  out.t = pr.t;
  out.distance = std::sqrt(pr.d2);
  out.residual = std::fabs(pr.res);
  out.iterations = it;
  out.status = out.residual < options.tolerance ? FootpointStatus::kConverged
                                                : FootpointStatus::kNotConverged;
  return out;
}

}  // namespace

FootpointResult refine_footpoint(const BSplineCurve& curve, Vec2 x, double t0,
                                 const ProjectionOptions& options) {
  const SplineBasis& basis = curve.basis();
  Probe cur = probe(curve, x, basis.to_domain(t0));
  FootpointResult out;
  out.status = FootpointStatus::kNotConverged;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (std::fabs(cur.res) < options.tolerance) {
      out.status = FootpointStatus::kConverged;
      break;
    }
    const double speed2 = squared_norm(cur.d1);
    if (std::sqrt(speed2) < 1e-14) return golden_section(curve, x, cur.t, options);

    // Newton step on the distance when the second-order term keeps it a
    // descent step; plain Gauss-Newton otherwise. Gauss-Newton alone slows
    // to a crawl for points near the centre of curvature.
    const double hess = speed2 - dot(cur.r, cur.dd);
    const double dt = cur.res / (hess > 1e-3 * speed2 ? hess : speed2);
    double a = 1.0;
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, a *= 0.5) {
      const Probe next = probe(curve, x, basis.to_domain(cur.t + a * dt));
      // Near the foot point the distance change drops below rounding; a step
      // that is not measurably worse but reduces the residual is kept.
      const bool closer = next.d2 < cur.d2;
      const bool flat = next.d2 <= cur.d2 * (1.0 + 4.0 * kEps) &&
                        std::fabs(next.res) < std::fabs(cur.res);
      if (closer || flat) {
        cur = next;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      const bool at_end = !basis.closed() && ((cur.t <= 0.0 && dt < 0.0) || (cur.t >= 1.0 && dt > 0.0));
      out.status = at_end ? FootpointStatus::kBoundary : FootpointStatus::kNotConverged;
      break;
    }
  }
  if (it == options.max_iterations && std::fabs(cur.res) < options.tolerance) {
    out.status = FootpointStatus::kConverged;
  }
  out.t = cur.t;
  out.distance = std::sqrt(cur.d2);
  out.residual = std::fabs(cur.res);
  out.iterations = it;
  return out;
}

CurveSamples sample_curve(const BSplineCurve& curve, int samples_per_span) {
  if (samples_per_span < 2) throw std::invalid_argument("samples_per_span must be >= 2");
  const SplineBasis& basis = curve.basis();
  const int spans = basis.span_count();
  CurveSamples s;
  const std::size_t count = static_cast<std::size_t>(spans) * samples_per_span + (basis.closed() ? 0 : 1);
  s.t.reserve(count);
  s.x.reserve(count);
  s.y.reserve(count);
  auto push = [&](double t) {
    const Vec2 p = curve.evaluate(t);
    s.t.push_back(t);
    s.x.push_back(p.x);
    s.y.push_back(p.y);
  };
  for (int k = 0; k < spans; ++k) {
    const auto [a, b] = basis.span_interval(k);
    for (int j = 0; j < samples_per_span; ++j) push(a + (b - a) * j / samples_per_span);
  }
  if (!basis.closed()) push(1.0);
  return s;
}

ProjectionResult project_all(const BSplineCurve& curve, std::span<const Vec2> points,
                             const ProjectionOptions& options) {
  const CurveSamples samples = sample_curve(curve, options.samples_per_span);
  const std::size_t count = samples.t.size();
  const bool closed = curve.closed();
  // Chord to the farther neighbour of every sample. A basin whose sampled
  // minimum sits at distance d_i cannot reach below d_i - 2 gap_i.
  std::vector<double> gap(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (!closed && i + 1 == count) break;
    const std::size_t j = (i + 1) % count;
    const double c = std::hypot(samples.x[j] - samples.x[i], samples.y[j] - samples.y[i]);
    gap[i] = std::max(gap[i], c);
    gap[j] = std::max(gap[j], c);
  }

  ProjectionResult out;
  out.t.resize(points.size());
  out.details.resize(points.size());
  std::vector<double> dist(count);  // squared
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Vec2 x = points[k];
    const simd::NearestSample ns = simd::nearest(samples.x, samples.y, x.x, x.y);
    FootpointResult best = refine_footpoint(curve, x, samples.t[ns.index], options);
    for (std::size_t i = 0; i < count; ++i) {
      const double dx = samples.x[i] - x.x;
      const double dy = samples.y[i] - x.y;
      dist[i] = dx * dx + dy * dy;
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (i == ns.index) continue;
      const double reach = best.distance + 2.0 * gap[i];
      if (dist[i] > reach * reach) continue;
      const bool has_prev = closed || i > 0;
      const bool has_next = closed || i + 1 < count;
      if (has_prev && dist[(i + count - 1) % count] < dist[i]) continue;
      if (has_next && dist[(i + 1) % count] < dist[i]) continue;
      const FootpointResult r = refine_footpoint(curve, x, samples.t[i], options);
      if (r.distance < best.distance) best = r;
    }
    out.details[k] = best;
    out.t[k] = best.t;
    if (best.flagged()) ++out.flagged;
  }
  return out;
}

ProjectionResult project_from_seeds(const BSplineCurve& curve, std::span<const Vec2> points,
                                    std::span<const double> seeds,
                                    const ProjectionOptions& options) {
  if (seeds.size() != points.size()) throw std::invalid_argument("one seed per point required");
  ProjectionResult out;
  out.t.resize(points.size());
  out.details.resize(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    out.details[k] = refine_footpoint(curve, points[k], seeds[k], options);
    out.t[k] = out.details[k].t;
    if (out.details[k].flagged()) ++out.flagged;
  }
  return out;
}

FootpointFrame frame_at(const BSplineCurve& curve, double t, Vec2 x) {
  const CurveJet jet = curve.evaluate_jet(t);
  const double speed = norm(jet.d1);
  if (speed < 1e-14) throw std::domain_error("frame_at: degenerate tangent");
  FootpointFrame f;
  f.t = curve.basis().to_domain(t);
  f.point = jet.point;
  f.tangent = (1.0 / speed) * jet.d1;
  const Vec2 left{-f.tangent.y, f.tangent.x};
  const double c = cross(jet.d1, jet.d2);
  if (std::fabs(c) < 1e-14) {
    f.curvature_radius = std::numeric_limits<double>::infinity();
    f.normal = left;
  } else {
    f.curvature_radius = speed * speed * speed / std::fabs(c);
    f.normal = c > 0.0 ? left : -1.0 * left;
  }
  const Vec2 r = x - jet.point;
  const double d = norm(r);
  f.signed_distance = dot(r, f.normal) >= 0.0 ? d : -d;
  return f;
}

bool should_reinitialize(double error_prev, double error_curr) {
  if (!(error_curr > 0.0)) return false;
  return std::fabs(error_curr - error_prev) / error_curr > 0.2;
}

}  // namespace bsfit
