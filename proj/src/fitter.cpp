#include "bsfit/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "bsfit/timing.hpp"

namespace bsfit {

namespace {

FitStatus from_lbfgs(LbfgsStatus s) {
  switch (s) {
    case LbfgsStatus::kConverged: return FitStatus::kConverged;
    case LbfgsStatus::kIterationCap: return FitStatus::kIterationCap;
    case LbfgsStatus::kLineSearchFailed: return FitStatus::kLineSearchFailed;
    case LbfgsStatus::kNonFinite: return FitStatus::kNonFinite;
  }
  return FitStatus::kNonFinite;
}

struct Correction {
  std::vector<double> t;
  double error = 0.0;
};

// Dense re-projection at fixed control points. A point keeps its current
// parameter when the re-projection does not bring it closer, so the
// corrected error never exceeds the current one.
Correction correct_footpoints(const BSplineCurve& curve, std::span<const Vec2> points,
                              std::span<const double> current, const ProjectionOptions& options) {
  const ProjectionResult proj = project_all(curve, points, options);
  Correction c;
  c.t.resize(points.size());
  double s = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d_old = squared_norm(curve.evaluate(current[k]) - points[k]);
    const double d_new = proj.details[k].distance * proj.details[k].distance;
    if (d_new < d_old) {
      c.t[k] = proj.t[k];
      s += d_new;
    } else {
      c.t[k] = current[k];
      s += d_old;
    }
  }
  c.error = points.empty() ? 0.0 : std::sqrt(s / static_cast<double>(points.size()));
  return c;
}

}  // namespace

FitResult fit_lbfgs(const FitProblem& problem, const BSplineCurve& initial,
                    const LbfgsConfig& config, const LbfgsFitOptions& options) {
  problem.validate();
  config.validate();
  if (!(options.restart_tol >= 0.0)) throw std::invalid_argument("restart_tol must be >= 0");
  if (options.max_restarts < 0) throw std::invalid_argument("max_restarts must be >= 0");
  if (initial.topology() != problem.topology) {
    throw std::invalid_argument("initial curve topology does not match the problem");
  }
  const JointObjective objective(problem);
  const auto& points = objective.problem().points;
  const int n = problem.topology.n;
  const std::size_t pc = 2 * static_cast<std::size_t>(n);

  FitResult result(Method::kLbfgs, initial);
  FitTrace& trace = result.trace;

  Stopwatch setup;
  std::vector<double> t;
  if (options.initial_params) {
    if (options.initial_params->size() != points.size()) {
      throw std::invalid_argument("initial_params needs one parameter per data point");
    }
    t = *options.initial_params;
  } else {
    t = project_all(initial, points, options.projection).t;
    trace.footpoint_initializations = 1;
  }
  trace.setup_seconds = setup.elapsed();

  std::vector<double> state = pack_state(initial.control_points(), t);
  const ValueGradient f = [&objective](std::span<const double> x, std::span<double> g) {
    return objective.value_and_gradient(x, g);
  };

  double elapsed = trace.setup_seconds;
  int offset = 0;
  const LbfgsObserver observer = [&](const LbfgsIteration& it, std::span<const double> x) {
    TraceRecord r;
    r.iteration = offset + it.iteration;
    at(r.phases, Phase::kGradient) = it.times.gradient;
    at(r.phases, Phase::kDirection) = it.times.direction;
    at(r.phases, Phase::kLineSearch) = it.times.linesearch;
    r.wall_seconds = r.iteration_seconds();
    elapsed += r.iteration_seconds();
    r.elapsed = elapsed;
    r.error = objective.fitting_error(x);
    r.grad_inf_norm = it.grad_inf_norm;
    trace.push(r);
  };

  LbfgsConfig run_config = config;
  result.status = FitStatus::kIterationCap;
  while (true) {
    run_config.max_iterations = config.max_iterations - offset;
    if (run_config.max_iterations < 1) {
      result.status = FitStatus::kIterationCap;
      break;
    }
    LbfgsResult run;
    try {
      run = minimize(f, state, run_config, observer);
    } catch (const std::runtime_error& e) {
      result.status = FitStatus::kNonFinite;
      result.message = e.what();
      break;
    }
    offset += run.iterations;
    state = std::move(run.x);
    result.status = from_lbfgs(run.status);
    result.final_grad_inf_norm = run.grad_inf_norm;
    if (run.status == LbfgsStatus::kNonFinite) {
      result.message = "non-finite objective";
      break;
    }

    Stopwatch sw;
    const BSplineCurve curve = objective.curve_from_state(state);
    const std::span<const double> t_cur(state.data() + pc, points.size());
    const double e = objective.fitting_error(state);
    Correction corr = correct_footpoints(curve, points, t_cur, options.projection);
    ++trace.footpoint_initializations;
    const double dt = sw.elapsed();
    trace.correction_seconds += dt;
    elapsed += dt;

    CorrectionEvent ev{offset, e, corr.error, false};
    if (std::fabs(e - corr.error) <= options.restart_tol) {
      trace.corrections.push_back(ev);
      break;
    }
    std::copy(corr.t.begin(), corr.t.end(), state.begin() + static_cast<std::ptrdiff_t>(pc));
    if (trace.restarts >= options.max_restarts) {
      trace.corrections.push_back(ev);
      result.status = FitStatus::kStuckAtLocalMinimum;
      result.message = "foot-point correction still active after the restart cap";
      std::vector<double> g(state.size());
      try {
        objective.evaluate(state, g);
        double gi = 0.0;
        for (double v : g) gi = std::max(gi, std::fabs(v));
        result.final_grad_inf_norm = gi;
      } catch (const std::runtime_error&) {
      }
      break;
    }
    ev.restarted = true;
    trace.corrections.push_back(ev);
    ++trace.restarts;
  }

  result.curve = objective.curve_from_state(state);
  result.params.assign(state.begin() + static_cast<std::ptrdiff_t>(pc), state.end());
  try {
    result.final_error = objective.fitting_error(state);
  } catch (const std::runtime_error&) {
    result.final_error = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

BSplineCurve default_initial_curve(const FitProblem& problem, int n) {
  const CurveTopology& topo = problem.topology;
  if (n < topo.degree + 1) throw std::invalid_argument("n must be at least degree + 1");
  const auto& pts = problem.points;
  if (pts.empty()) throw std::invalid_argument("no data points");

  Vec2 lo = pts.front();
  Vec2 hi = pts.front();
  Vec2 mean;
  for (Vec2 p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    mean += p;
  }
  mean = (1.0 / static_cast<double>(pts.size())) * mean;

  // Principal axis from the 2x2 covariance.
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (Vec2 p : pts) {
    const Vec2 d = p - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  const double half_diff = 0.5 * (sxx - syy);
  const double root = std::hypot(half_diff, sxy);
  const double l1 = 0.5 * (sxx + syy) + root;
  const double l2 = 0.5 * (sxx + syy) - root;
  const double angle = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  const Vec2 axis{std::cos(angle), std::sin(angle)};

  std::vector<Vec2> ctrl(static_cast<std::size_t>(n));
  if (topo.closed) {
    const Vec2 size = hi - lo;
    const bool collinear = l1 <= 0.0 || l2 <= 1e-12 * l1;
    double radius = 0.6 * (collinear ? std::max(size.x, size.y) : norm(size));
    if (!(radius > 0.0)) throw std::invalid_argument("degenerate data: all points coincide");
    const Vec2 centre = 0.5 * (lo + hi);
    for (int i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * i / n;
      ctrl[static_cast<std::size_t>(i)] = centre + radius * Vec2{std::cos(a), std::sin(a)};
    }
  } else {
    double smin = 0.0, smax = 0.0;
    for (Vec2 p : pts) {
      const double s = dot(p - mean, axis);
      smin = std::min(smin, s);
      smax = std::max(smax, s);
    }
    if (!(smax > smin)) throw std::invalid_argument("degenerate data: all points coincide");
    for (int i = 0; i < n; ++i) {
      const double s = smin + (smax - smin) * i / (n - 1);
      ctrl[static_cast<std::size_t>(i)] = mean + s * axis;
    }
  }
  return make_uniform_curve(n, topo.degree, topo.closed, std::move(ctrl));
}

}  // namespace bsfit
