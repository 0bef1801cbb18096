#include "bsfit/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bsfit/simd.hpp"
#include "bsfit/timing.hpp"

namespace bsfit {

void LbfgsConfig::validate() const {
  if (m < 1) throw std::invalid_argument("L-BFGS history size m must be >= 1");
  if (!(c1 > 0.0 && c1 < c2 && c2 < 1.0)) {
    throw std::invalid_argument("Wolfe constants must satisfy 0 < c1 < c2 < 1");
  }
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (max_linesearch_steps < 1) throw std::invalid_argument("max_linesearch_steps must be >= 1");
}

std::string_view to_string(LbfgsStatus status) {
  switch (status) {
    case LbfgsStatus::kConverged: return "converged";
    case LbfgsStatus::kIterationCap: return "iteration_cap";
    case LbfgsStatus::kLineSearchFailed: return "linesearch_failed";
    case LbfgsStatus::kNonFinite: return "non_finite";
  }
  return "unknown";
}

LbfgsHistory::LbfgsHistory(int capacity, std::size_t dimension)
    : capacity_(capacity), dim_(dimension) {
  if (capacity < 1) throw std::invalid_argument("history capacity must be >= 1");
  const auto cap = static_cast<std::size_t>(capacity);
  s_.resize(cap * dim_);
  y_.resize(cap * dim_);
  rho_.resize(cap);
  gamma_.resize(cap);
}

std::span<const double> LbfgsHistory::s(int i) const {
  return {s_.data() + slot(i) * dim_, dim_};
}

std::span<const double> LbfgsHistory::y(int i) const {
  return {y_.data() + slot(i) * dim_, dim_};
}

bool LbfgsHistory::push(std::span<const double> s, std::span<const double> y) {
  if (s.size() != dim_ || y.size() != dim_) throw std::invalid_argument("pair has wrong dimension");
  const double ys = simd::dot(y, s);
  const double yy = simd::dot(y, y);
  const double ss = simd::dot(s, s);
  if (!(ys > 1e-14 * std::sqrt(yy) * std::sqrt(ss)) || !(yy > 0.0)) return false;

  std::size_t target;
  if (size_ < capacity_) {
    target = slot(size_);
    ++size_;
  } else {
    target = slot(0);
    head_ = (head_ + 1) % capacity_;
  }
  std::copy(s.begin(), s.end(), s_.begin() + static_cast<std::ptrdiff_t>(target * dim_));
  std::copy(y.begin(), y.end(), y_.begin() + static_cast<std::ptrdiff_t>(target * dim_));
  rho_[target] = 1.0 / ys;
  gamma_[target] = ys / yy;
  return true;
}

double LbfgsHistory::gamma() const { return empty() ? 1.0 : gamma_[slot(size_ - 1)]; }

void two_loop_direction(const LbfgsHistory& history, std::span<const double> grad,
                        std::span<double> z) {
  if (grad.size() != history.dimension() || z.size() != grad.size()) {
    throw std::invalid_argument("two_loop_direction: dimension mismatch");
  }
  const simd::Kernels& k = simd::active();
  const std::size_t n = grad.size();
  std::copy(grad.begin(), grad.end(), z.begin());
  const int count = history.size();
  if (count == 0) return;

  std::vector<double> alpha(static_cast<std::size_t>(count));
  for (int i = count - 1; i >= 0; --i) {
    const double a = history.rho(i) * k.dot(history.s(i).data(), z.data(), n);
    alpha[static_cast<std::size_t>(i)] = a;
    k.axpy(-a, history.y(i).data(), z.data(), n);
  }
  k.scale(history.gamma(), z.data(), n);
  for (int i = 0; i < count; ++i) {
    const double b = history.rho(i) * k.dot(history.y(i).data(), z.data(), n);
    k.axpy(alpha[static_cast<std::size_t>(i)] - b, history.s(i).data(), z.data(), n);
  }
}

LineSearchResult wolfe_line_search(const ValueGradient& f, std::span<const double> x,
                                   std::span<const double> p, double f0,
                                   std::span<const double> g0, const LbfgsConfig& config,
                                   std::span<double> x_new, std::span<double> g_new) {
  const simd::Kernels& k = simd::active();
  const std::size_t n = x.size();
  const double dg0 = k.dot(g0.data(), p.data(), n);
  if (!(dg0 < 0.0)) {
    throw std::invalid_argument("wolfe_line_search: p is not a descent direction");
  }

  LineSearchResult res;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double alpha = 1.0;
  double best_alpha = 0.0;
  double best_f = f0;
  Stopwatch sw;
  for (int it = 0; it < config.max_linesearch_steps; ++it) {
    k.step(x.data(), alpha, p.data(), x_new.data(), n);
    const double fv = f(x_new, g_new);
    ++res.evaluations;
    if (it == 0) res.first_trial_seconds = sw.elapsed();

    const bool armijo = std::isfinite(fv) && fv <= f0 + config.c1 * alpha * dg0;
    if (!armijo) {
      hi = alpha;
      if (lo == 0.0 && std::isfinite(fv)) {
        // Minimizer of the quadratic through f0, dg0 and fv, kept in
        // [0.1, 0.5] * alpha.
        const double q = -dg0 * alpha * alpha / (2.0 * (fv - f0 - dg0 * alpha));
        alpha = std::clamp(q, 0.1 * alpha, 0.5 * alpha);
      } else {
        alpha = 0.5 * (lo + hi);
      }
      continue;
    }
    const double slope = k.dot(g_new.data(), p.data(), n);
    if (fv < best_f) {
      best_f = fv;
      best_alpha = alpha;
    }
    if (slope >= config.c2 * dg0) {
      res.status = LineSearchStatus::kAccepted;
      res.step = alpha;
      res.value = fv;
      res.slope = slope;
      res.sufficient_decrease = true;
      return res;
    }
    lo = alpha;
    alpha = std::isinf(hi) ? 2.0 * alpha : 0.5 * (lo + hi);
  }

  res.status = LineSearchStatus::kFailed;
  if (best_alpha > 0.0) {
    k.step(x.data(), best_alpha, p.data(), x_new.data(), n);
    res.value = f(x_new, g_new);
    ++res.evaluations;
    res.step = best_alpha;
    res.slope = k.dot(g_new.data(), p.data(), n);
    res.sufficient_decrease = true;
  } else {
    std::copy(x.begin(), x.end(), x_new.begin());
    std::copy(g0.begin(), g0.end(), g_new.begin());
    res.value = f0;
    res.step = 0.0;
    res.slope = dg0;
  }
  return res;
}

LbfgsResult minimize(const ValueGradient& f, std::span<const double> x0,
                     const LbfgsConfig& config, const LbfgsObserver& observer) {
  config.validate();
  const simd::Kernels& k = simd::active();
  const std::size_t n = x0.size();

  LbfgsResult out;
  out.x.assign(x0.begin(), x0.end());
  out.gradient.assign(n, 0.0);
  std::vector<double>& x = out.x;
  std::vector<double>& g = out.gradient;

  double fx = f(x, g);
  out.value = fx;
  if (!std::isfinite(fx)) {
    out.status = LbfgsStatus::kNonFinite;
    return out;
  }
  double gnorm = k.inf_norm(g.data(), n);
  out.grad_inf_norm = gnorm;
  if (!std::isfinite(gnorm)) {
    out.status = LbfgsStatus::kNonFinite;
    return out;
  }
  if (gnorm < config.grad_tol) {
    out.status = LbfgsStatus::kConverged;
    return out;
  }

  LbfgsHistory history(config.m, n);
  std::vector<double> z(n), p(n), x_new(n), g_new(n), s(n), y(n);
  out.status = LbfgsStatus::kIterationCap;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    LbfgsIteration rec;
    rec.iteration = iter;
    rec.previous_value = fx;

    LineSearchResult ls;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Stopwatch sw;
      two_loop_direction(history, g, z);
      for (std::size_t i = 0; i < n; ++i) p[i] = -z[i];
      double slope = k.dot(g.data(), p.data(), n);
      if (!(slope < 0.0) && !history.empty()) {
        history.clear();
        rec.history_reset = true;
        for (std::size_t i = 0; i < n; ++i) p[i] = -g[i];
        slope = k.dot(g.data(), p.data(), n);
      }
      rec.times.direction += sw.lap();
      if (!(slope < 0.0)) break;  // zero or non-finite gradient

      ls = wolfe_line_search(f, x, p, fx, g, config, x_new, g_new);
      const double ls_total = sw.lap();
      rec.times.gradient += ls.first_trial_seconds;
      rec.times.linesearch += ls_total - ls.first_trial_seconds;
      rec.evaluations += ls.evaluations;
      rec.initial_slope = slope;

      if (ls.status == LineSearchStatus::kAccepted || ls.sufficient_decrease) {
        accepted = true;
      } else if (!history.empty()) {
        history.clear();
        rec.history_reset = true;
      } else {
        break;
      }
    }
    if (!accepted) {
      out.status = LbfgsStatus::kLineSearchFailed;
      break;
    }

    Stopwatch sw;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    history.push(s, y);
    x.swap(x_new);
    g.swap(g_new);
    fx = ls.value;
    gnorm = k.inf_norm(g.data(), n);
    rec.times.direction += sw.lap();

    rec.value = fx;
    rec.grad_inf_norm = gnorm;
    rec.step = ls.step;
    out.trace.push_back(rec);
    out.iterations = iter;
    out.value = fx;
    out.grad_inf_norm = gnorm;
    if (observer) observer(rec, x);

    if (!std::isfinite(gnorm)) {
      out.status = LbfgsStatus::kNonFinite;
      break;
    }
    if (gnorm < config.grad_tol) {
      out.status = LbfgsStatus::kConverged;
      break;
    }
  }
  return out;
}

}  // namespace bsfit
