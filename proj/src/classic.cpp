#include "bsfit/classic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bsfit/timing.hpp"

namespace bsfit {

namespace {

// 2x2 symmetric weight applied to the residual of one point:
// e_k = r^T W r with r = P(t_k) - X_k.
struct PointWeight {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

PointWeight identity_weight() { return {1.0, 0.0, 1.0}; }

PointWeight outer(Vec2 v, double w = 1.0) { return {w * v.x * v.x, w * v.x * v.y, w * v.y * v.y}; }

PointWeight operator+(PointWeight a, PointWeight b) {
  return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}

QuadraticModel empty_model(const JointObjective& objective) {
  const SplineBasis& basis = objective.basis();
  QuadraticModel m;
  m.a = BlockBandMatrix(basis.size(), basis.degree(), basis.closed());
  m.b.assign(2 * static_cast<std::size_t>(basis.size()), 0.0);
  return m;
}

// A += 2 alpha G1 (x) I2 + 2 beta G2 (x) I2.
void add_fairing(const JointObjective& objective, BlockBandMatrix& a) {
  const FitProblem& pr = objective.problem();
  if (pr.alpha == 0.0 && pr.beta == 0.0) return;
  const FairingGrams& g = objective.grams();
  const int n = g.n;
  const int w = a.half_band();
  for (int i = 0; i < n; ++i) {
    for (int d = -w; d <= w; ++d) {
      int j = i + d;
      if (a.cyclic()) {
        j = ((j % n) + n) % n;
        if (a.offset(i, j) != d) continue;
      } else if (j < 0 || j >= n) {
        continue;
      }
      const double v = 2.0 * (pr.alpha * g.d1(i, j) + pr.beta * g.d2(i, j));
      if (v == 0.0) continue;
      a.add_block(i, j, v, 0.0, 0.0, v);
    }
  }
}

// Adds 1/2 (P(t) - X)^T W (P(t) - X) to the model.
void add_point(QuadraticModel& m, const SplineBasis& basis, double t, Vec2 x, PointWeight w) {
  const SpanEvaluation ev = basis.evaluate(basis.to_domain(t), 0);
  const int p = basis.degree();
  for (int a = 0; a <= p; ++a) {
    const double na = ev.basis[static_cast<std::size_t>(a)];
    if (na == 0.0) continue;
    const int ia = basis.control_index(ev.span, a);
    for (int b = 0; b <= p; ++b) {
      const double nb = ev.basis[static_cast<std::size_t>(b)];
      if (nb == 0.0) continue;
      const int ib = basis.control_index(ev.span, b);
      const double s = na * nb;
      m.a.add_block(ia, ib, s * w.xx, s * w.xy, s * w.xy, s * w.yy);
    }
    m.b[2 * static_cast<std::size_t>(ia)] += na * (w.xx * x.x + w.xy * x.y);
    m.b[2 * static_cast<std::size_t>(ia) + 1] += na * (w.xy * x.x + w.yy * x.y);
  }
  m.c += 0.5 * (w.xx * x.x * x.x + 2.0 * w.xy * x.x * x.y + w.yy * x.y * x.y);
}

void check_params(const JointObjective& objective, const BSplineCurve& curve,
                  std::span<const double> params) {
  if (params.size() != objective.point_count()) {
    throw std::invalid_argument("one location parameter per data point required");
  }
  if (curve.topology() != objective.problem().topology) {
    throw std::invalid_argument("curve topology does not match the problem");
  }
}

template <class WeightFn>
QuadraticModel assemble(const JointObjective& objective, const BSplineCurve& curve,
                        std::span<const double> params, WeightFn&& weight) {
  check_params(objective, curve, params);
  QuadraticModel m = empty_model(objective);
  const auto& pts = objective.problem().points;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    add_point(m, objective.basis(), params[k], pts[k], weight(params[k], pts[k], m));
  }
  add_fairing(objective, m.a);
  return m;
}

std::vector<double> solve_or_throw(const QuadraticModel& model, std::span<const double> rhs,
                                   double shift) {
  auto x = solve_spd(model.a, rhs, shift);
  if (!x) throw std::runtime_error("control-point system is not positive definite");
  return std::move(*x);
}

}  // namespace

double QuadraticModel::evaluate(std::span<const double> coords) const {
  const std::vector<double> ap = a.multiply(coords);
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    quad += coords[i] * ap[i];
    lin += b[i] * coords[i];
  }
  return 0.5 * quad - lin + c;
}

std::vector<double> QuadraticModel::gradient(std::span<const double> coords) const {
  std::vector<double> g = a.multiply(coords);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= b[i];
  return g;
}

QuadraticModel assemble_pdm(const JointObjective& objective, const BSplineCurve& curve,
                            std::span<const double> params) {
  return assemble(objective, curve, params,
                  [](double, Vec2, QuadraticModel&) { return identity_weight(); });
}

QuadraticModel assemble_tdm(const JointObjective& objective, const BSplineCurve& curve,
                            std::span<const double> params) {
  return assemble(objective, curve, params, [&](double t, Vec2, QuadraticModel& m) {
    const CurveJet jet = curve.evaluate_d1(t);
    const double speed = norm(jet.d1);
    if (!(speed >= 1e-14)) {
      ++m.fallback_points;
      return identity_weight();
    }
    // Same arithmetic as frame_at, so SDM reduces to this bit for bit.
    const Vec2 tangent = (1.0 / speed) * jet.d1;
    return outer(Vec2{-tangent.y, tangent.x});
  });
}

double sdm_tangent_weight(double signed_distance, double curvature_radius, bool* clamped) {
  if (clamped) *clamped = false;
  const double d = signed_distance;
  const double rho = curvature_radius;
  if (d < 0.0) return std::isinf(rho) ? 0.0 : d / (d - rho);
  if (d < rho) return 0.0;
  if (clamped) *clamped = true;
  return 1.0;
}

QuadraticModel assemble_sdm(const JointObjective& objective, const BSplineCurve& curve,
                            std::span<const double> params) {
  return assemble(objective, curve, params, [&](double t, Vec2 x, QuadraticModel& m) {
    FootpointFrame f;
    try {
      f = frame_at(curve, t, x);
    } catch (const std::domain_error&) {
      ++m.fallback_points;
      return identity_weight();
    }
    bool clamped = false;
    const double wt = sdm_tangent_weight(f.signed_distance, f.curvature_radius, &clamped);
    if (clamped) ++m.clamped_coefficients;
    PointWeight w = outer(f.normal);
    if (wt != 0.0) w = w + outer(f.tangent, wt);
    return w;
  });
}

double tdmlm_mu(const QuadraticModel& model, int n) {
  if (n < 1) throw std::invalid_argument("tdmlm_mu: n must be positive");
  return model.a.trace() / (80.0 * n);
}

std::vector<double> solve_tdmlm_step(const QuadraticModel& model, int n,
                                     std::span<const double> anchor) {
  const double mu = tdmlm_mu(model, n);
  std::vector<double> rhs = model.b;
  if (!anchor.empty()) {
    if (anchor.size() != rhs.size()) throw std::invalid_argument("anchor size mismatch");
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += mu * anchor[i];
  }
  return solve_or_throw(model, rhs, mu);
}

std::vector<double> solve_model(const QuadraticModel& model) {
  const double ridge = 1e-12 * model.a.trace() / model.a.dim();
  return solve_or_throw(model, model.b, ridge);
}

namespace {

double rms_of(const ProjectionResult& proj) {
  if (proj.details.empty()) return 0.0;
  double s = 0.0;
  for (const FootpointResult& r : proj.details) s += r.distance * r.distance;
  return std::sqrt(s / static_cast<double>(proj.details.size()));
}

std::vector<double> control_coords(const BSplineCurve& curve) {
  std::vector<double> c;
  c.reserve(2 * static_cast<std::size_t>(curve.size()));
  for (Vec2 p : curve.control_points()) {
    c.push_back(p.x);
    c.push_back(p.y);
  }
  return c;
}

}  // namespace

FitResult run_alternating(Method method, const FitProblem& problem, const BSplineCurve& initial,
                          const AlternatingConfig& config) {
  if (method == Method::kLbfgs) throw std::invalid_argument("run_alternating: not an alternating method");
  if (config.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");
  problem.validate();
  const JointObjective objective(problem);
  if (initial.topology() != problem.topology) {
    throw std::invalid_argument("initial curve topology does not match the problem");
  }
  const auto& points = objective.problem().points;
  const int n = problem.topology.n;

  FitResult result(method, initial);
  FitTrace& trace = result.trace;

  Stopwatch setup;
  ProjectionResult proj = project_all(result.curve, points, config.projection);
  trace.setup_seconds = setup.elapsed();
  trace.footpoint_initializations = 1;

  const double e0 = rms_of(proj);
  double e_prev = e0;
  double elapsed = trace.setup_seconds;
  std::vector<double> grad(objective.dimension());

  auto measure = [&](const BSplineCurve& curve, std::span<const double> t) {
    std::vector<double> state = pack_state(curve.control_points(), t);
    objective.evaluate(state, grad);
    double g = 0.0;
    for (double v : grad) g = std::max(g, std::fabs(v));
    return g;
  };

  result.status = FitStatus::kIterationCap;
  result.final_error = e0;
  try {
    result.final_grad_inf_norm = measure(result.curve, proj.t);
  } catch (const std::runtime_error& e) {
    result.status = FitStatus::kNonFinite;
    result.message = e.what();
    return result;
  }
  if (result.final_grad_inf_norm < config.grad_tol) result.status = FitStatus::kConverged;

  for (int it = 1; it <= config.max_iterations && result.status == FitStatus::kIterationCap; ++it) {
    TraceRecord rec;
    rec.iteration = it;
    Stopwatch wall;
    Stopwatch sw;

    QuadraticModel model;
    switch (method) {
      case Method::kPdm: model = assemble_pdm(objective, result.curve, proj.t); break;
      case Method::kTdmlm: model = assemble_tdm(objective, result.curve, proj.t); break;
      case Method::kSdm: model = assemble_sdm(objective, result.curve, proj.t); break;
      case Method::kLbfgs: break;
    }
    at(rec.phases, Phase::kMatrixFilling) = sw.lap();

    std::vector<double> coords;
    try {
      if (method == Method::kTdmlm) {
        coords = solve_tdmlm_step(model, n, control_coords(result.curve));
      } else {
        coords = solve_model(model);
      }
    } catch (const std::runtime_error& e) {
      result.status = FitStatus::kSolveFailed;
      result.message = e.what();
      break;
    }
    at(rec.phases, Phase::kMatrixSolving) = sw.lap();

    BSplineCurve next = result.curve.with_control_points(unpack_control_points(coords, n));
    proj = project_from_seeds(next, points, proj.t, config.projection);
    if (should_reinitialize(e_prev, rms_of(proj))) {
      proj = project_all(next, points, config.projection);
      ++trace.footpoint_initializations;
    }
    at(rec.phases, Phase::kFootpointProjection) = sw.lap();
    rec.wall_seconds = wall.elapsed();
    result.curve = std::move(next);
    trace.clamp_events += model.clamped_coefficients;

    elapsed += rec.iteration_seconds();
    rec.elapsed = elapsed;
    rec.error = rms_of(proj);
    try {
      rec.grad_inf_norm = measure(result.curve, proj.t);
    } catch (const std::runtime_error& e) {
      result.status = FitStatus::kNonFinite;
      result.message = e.what();
      break;
    }
    trace.push(rec);
    result.final_error = rec.error;
    result.final_grad_inf_norm = rec.grad_inf_norm;
    e_prev = rec.error;

    if (!std::isfinite(rec.error) || !std::isfinite(rec.grad_inf_norm)) {
      result.status = FitStatus::kNonFinite;
      result.message = "non-finite fitting error";
    } else if (rec.error > config.divergence_factor * e0 && e0 > 0.0) {
      result.status = FitStatus::kDiverged;
      result.message = "fitting error grew beyond the divergence bound";
    } else if (rec.grad_inf_norm < config.grad_tol) {
      result.status = FitStatus::kConverged;
    }
  }
  result.params = proj.t;
  return result;
}

}  // namespace bsfit
