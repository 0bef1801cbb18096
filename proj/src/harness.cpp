#include "bsfit/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "bsfit/classic.hpp"
#include "bsfit/fitter.hpp"
#include "bsfit/io.hpp"
#include "bsfit/objective.hpp"

namespace bsfit {

void RunConfig::validate() const {
  if (n_ctrl < degree + 1) throw std::invalid_argument("n_ctrl must be at least degree + 1");
  if (degree < 1 || degree > kMaxDegree) throw std::invalid_argument("degree out of range");
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw std::invalid_argument("fairing weights must be >= 0");
  if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) throw std::invalid_argument("need 0 < c1 < c2 < 1");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
  if (!(restart_tol >= 0.0)) throw std::invalid_argument("restart_tol must be >= 0");
  if (samples_per_span < 2) throw std::invalid_argument("samples_per_span must be >= 2");
  if (method == Method::kSdm && degree < 2) throw std::invalid_argument("sdm needs degree >= 2");
}

namespace {

BSplineCurve map_curve(const BSplineCurve& c, const AffineTransform& tf, bool to_unit) {
  std::vector<Vec2> pts(c.control_points().begin(), c.control_points().end());
  for (Vec2& p : pts) p = to_unit ? tf.to_unit(p) : tf.to_raw(p);
  return c.with_control_points(std::move(pts));
}

FitResult dispatch(const RunConfig& cfg, const FitProblem& problem, const BSplineCurve& initial) {
  ProjectionOptions proj;
  proj.samples_per_span = cfg.samples_per_span;
  if (cfg.method == Method::kLbfgs) {
    LbfgsConfig lc;
    lc.m = cfg.m;
    lc.c1 = cfg.c1;
    lc.c2 = cfg.c2;
    lc.grad_tol = cfg.grad_tol;
    lc.max_iterations = cfg.max_iter;
    LbfgsFitOptions opts;
    opts.restart_tol = cfg.restart_tol;
    opts.projection = proj;
    return fit_lbfgs(problem, initial, lc, opts);
  }
  AlternatingConfig ac;
  ac.max_iterations = cfg.max_iter;
  ac.grad_tol = cfg.grad_tol;
  ac.projection = proj;
  return run_alternating(cfg.method, problem, initial, ac);
}

std::string percent(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << v;
  return s.str();
}

}  // namespace

RunOutcome run_fit(const RunConfig& config) {
  config.validate();
  std::vector<Vec2> raw = config.input.empty() ? generate_shape(config.shape) : read_points(config.input);
  if (raw.empty()) throw std::invalid_argument("no data points");
  NormalizedPoints norm = normalize_points(raw);

  FitProblem problem;
  problem.points = norm.points;
  problem.alpha = config.alpha;
  problem.beta = config.beta;
  problem.topology = {config.n_ctrl, config.degree, config.closed};

  std::optional<BSplineCurve> initial;
  if (!config.initial_curve.empty()) {
    BSplineCurve c = read_curve(config.initial_curve);
    if (c.topology() != problem.topology) {
      throw std::invalid_argument("initial curve does not match n_ctrl/degree/closed");
    }
    initial = map_curve(c, norm.transform, true);
  } else {
    initial = default_initial_curve(problem, config.n_ctrl);
  }
  FitResult fit = dispatch(config, problem, *initial);
  BSplineCurve raw_curve = map_curve(fit.curve, norm.transform, false);
  return RunOutcome{std::move(raw), std::move(norm.points), std::move(fit), std::move(raw_curve)};
}

std::vector<std::pair<std::string, double>> phase_breakdown(const FitResult& fit) {
  const PhaseTimes t = fit.trace.phase_totals();
  std::vector<std::pair<std::string, double>> parts;
  if (fit.method == Method::kLbfgs) {
    parts = {{"direction", at(t, Phase::kGradient) + at(t, Phase::kDirection)},
             {"linesearch", at(t, Phase::kLineSearch)}};
  } else {
    parts = {{std::string(to_string(Phase::kMatrixFilling)), at(t, Phase::kMatrixFilling)},
             {std::string(to_string(Phase::kMatrixSolving)), at(t, Phase::kMatrixSolving)},
             {std::string(to_string(Phase::kFootpointProjection)), at(t, Phase::kFootpointProjection)}};
  }
  double total = 0.0;
  for (const auto& p : parts) total += p.second;
  for (auto& p : parts) p.second = total > 0.0 ? 100.0 * p.second / total : 0.0;
  return parts;
}

std::string summary_line(const FitResult& fit) {
  std::ostringstream s;
  s << std::setprecision(6);
  s << "method=" << to_string(fit.method) << " status=" << to_string(fit.status)
    << " iterations=" << fit.trace.records.size() << " final_error=" << fit.final_error
    << " grad_inf_norm=" << fit.final_grad_inf_norm << " total_s=" << fit.trace.total_seconds()
    << " mean_iter_s=" << fit.trace.mean_iteration_seconds() << " restarts=" << fit.trace.restarts;
  for (const auto& [name, share] : phase_breakdown(fit)) s << ' ' << name << "_pct=" << percent(share);
  return s.str();
}

FitResult run_and_trace(const RunConfig& config, std::ostream& log) {
  RunOutcome out = run_fit(config);
  if (!config.trace_csv.empty()) {
    if (config.trace_csv == "-") {
      write_trace_csv(std::cout, out.fit.trace);
    } else {
      std::ofstream f(config.trace_csv);
      if (!f) throw std::runtime_error("cannot write " + config.trace_csv);
      write_trace_csv(f, out.fit.trace);
    }
  }
  if (!config.curve_out.empty()) write_curve(config.curve_out, out.raw_curve);
  if (!config.svg_out.empty()) {
    std::ofstream f(config.svg_out);
    if (!f) throw std::runtime_error("cannot write " + config.svg_out);
    write_svg(f, out.unit_points, &out.fit.curve);
  }
  log << summary_line(out.fit) << '\n';
  if (!out.fit.message.empty()) log << "note: " << out.fit.message << '\n';
  return std::move(out.fit);
}

std::vector<ScalingRow> benchmark_scaling(const RunConfig& base, const ScalingOptions& options) {
  if (options.levels.empty()) throw std::invalid_argument("at least one level required");
  if (options.window < 1 || options.repeats < 1) throw std::invalid_argument("window and repeats must be >= 1");
  std::vector<ScalingRow> rows;
  std::vector<RunConfig> configs;
  for (int level : options.levels) {
    RunConfig cfg = base;
    cfg.trace_csv.clear();
    cfg.curve_out.clear();
    cfg.svg_out.clear();
    cfg.max_iter = std::min(base.max_iter, options.window);
    if (options.axis == ScalingAxis::kDataPoints) {
      cfg.shape.count = level;
      cfg.input.clear();
    } else {
      cfg.n_ctrl = level;
    }
    for (Method method : options.methods) {
      cfg.method = method;
      ScalingRow row;
      row.method = method;
      row.level = level;
      rows.push_back(row);
      configs.push_back(cfg);
    }
  }

  // Repeats are interleaved across cells, and within a repeat one method
  // runs all its levels back to back, so drift in machine speed lands on a
  // method's levels alike.
  const std::size_t methods = options.methods.size();
  std::vector<std::size_t> order;
  for (std::size_t m = 0; m < methods; ++m) {
    for (std::size_t l = 0; l < options.levels.size(); ++l) order.push_back(l * methods + m);
  }
  std::vector<std::vector<double>> means(rows.size());
  for (int r = 0; r < options.repeats; ++r) {
    for (std::size_t c : order) {
      ScalingRow& row = rows[c];
      if (!row.error.empty()) continue;
      try {
        RunOutcome out = run_fit(configs[c]);
        const auto used = std::min<std::size_t>(out.fit.trace.records.size(),
                                                static_cast<std::size_t>(options.window));
        means[c].push_back(out.fit.trace.mean_iteration_seconds(used));
        row.iterations = static_cast<int>(used);
        row.final_error = out.fit.final_error;
        row.status = out.fit.status;
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  }
  // Levels are compared through ratios paired within a repeat, which cancels
  // drift in machine speed; medians over repeats drop stray preemptions. The
  // first level anchors the scale with its median time.
  auto median = [](std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  for (std::size_t m = 0; m < methods; ++m) {
    const std::size_t c0 = m;
    for (std::size_t l = 0; l < options.levels.size(); ++l) {
      const std::size_t c = l * methods + m;
      if (!rows[c].error.empty()) continue;
      if (l == 0 || !rows[c0].error.empty()) {
        rows[c].mean_iteration_seconds = median(means[c]);
        continue;
      }
      std::vector<double> ratios;
      for (std::size_t r = 0; r < means[c].size(); ++r) ratios.push_back(means[c][r] / means[c0][r]);
      rows[c].mean_iteration_seconds = median(means[c0]) * median(ratios);
    }
  }
  return rows;
}

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows) {
  out << "# bsfit-scaling v1\n";
  out << "method,level,mean_iter_s,iterations,final_error,status\n";
  out << std::setprecision(9);
  for (const ScalingRow& r : rows) {
    out << to_string(r.method) << ',' << r.level << ',' << r.mean_iteration_seconds << ','
        << r.iterations << ',' << r.final_error << ','
        << (r.error.empty() ? std::string(to_string(r.status)) : "error") << '\n';
  }
}

}  // namespace bsfit
