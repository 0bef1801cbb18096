#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace bsfit {

/// f(x) with its gradient written into g. Returns f.
using ValueGradient = std::function<double(std::span<const double> x, std::span<double> g)>;

struct LbfgsConfig {
  int m = 20;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-8;  // on the infinity norm
  int max_iterations = 100000;
  int max_linesearch_steps = 40;

  void validate() const;
};

/// Ring buffer of the last m curvature pairs (s, y, rho = 1 / y^T s).
///
/// Pairs whose curvature y^T s is not safely positive are rejected at
/// insertion, so every stored pair keeps the implied inverse Hessian positive
/// definite.
class LbfgsHistory {
 public:
  LbfgsHistory(int capacity, std::size_t dimension);

  /// Stores the pair unless y^T s <= 1e-14 |y| |s|. Returns whether it was
  /// stored. When full, the oldest pair is discarded first.
  bool push(std::span<const double> s, std::span<const double> y);
  void clear() { size_ = 0; }

  int size() const { return size_; }
  int capacity() const { return capacity_; }
  std::size_t dimension() const { return dim_; }
  bool empty() const { return size_ == 0; }

  // i = 0 is the oldest stored pair, i = size() - 1 the newest.
  std::span<const double> s(int i) const;
  std::span<const double> y(int i) const;
  double rho(int i) const { return rho_[slot(i)]; }

  /// s^T y / y^T y of the newest pair; 1 when empty.
  double gamma() const;

 private:
  std::size_t slot(int i) const {
    return static_cast<std::size_t>((head_ + i) % capacity_);
  }

  int capacity_;
  std::size_t dim_;
  int head_ = 0;  // slot of the oldest pair
  int size_ = 0;
  std::vector<double> s_;
  std::vector<double> y_;
  std::vector<double> rho_;
  std::vector<double> gamma_;
};

/// z = H grad by the two-loop recursion with H0 = gamma I (H0 = I when the
/// history is empty). The search direction is -z.
void two_loop_direction(const LbfgsHistory& history, std::span<const double> grad,
                        std::span<double> z);

enum class LineSearchStatus { kAccepted, kFailed };

struct LineSearchResult {
  LineSearchStatus status = LineSearchStatus::kFailed;
  double step = 0.0;
  double value = 0.0;
  double slope = 0.0;  // g_new^T p
  int evaluations = 0;
  double first_trial_seconds = 0.0;  // time of the evaluation at step 1
  bool sufficient_decrease = false;  // holds for the returned point
};

/// Weak Wolfe line search starting from step 1. While sufficient decrease
/// fails and no lower bracket exists, the next trial is the minimizer of the
/// quadratic through f0, the initial slope and the failed value, clamped to
/// [0.1, 0.5] times the failed step. Once the curvature condition has failed
/// at some step the bracket is bisected. On success x_new/g_new hold the accepted point. On failure they
/// hold the best point seen (lowest f), or x itself if nothing improved.
///
/// Throws std::invalid_argument if p is not a descent direction.
LineSearchResult wolfe_line_search(const ValueGradient& f, std::span<const double> x,
                                   std::span<const double> p, double f0,
                                   std::span<const double> g0, const LbfgsConfig& config,
                                   std::span<double> x_new, std::span<double> g_new);

enum class LbfgsStatus { kConverged, kIterationCap, kLineSearchFailed, kNonFinite };

std::string_view to_string(LbfgsStatus status);

/// Per-iteration timings of the minimizer.
struct LbfgsPhaseTimes {
  double gradient = 0.0;    // objective + gradient at the first trial step
  double direction = 0.0;   // two-loop recursion and history update
  double linesearch = 0.0;  // extra trials and Wolfe tests
};

struct LbfgsIteration {
  int iteration = 0;
  double previous_value = 0.0;
  double value = 0.0;
  double grad_inf_norm = 0.0;
  double step = 0.0;
  double initial_slope = 0.0;  // g_k^T p_k
  int evaluations = 0;
  bool history_reset = false;
  LbfgsPhaseTimes times;
};

struct LbfgsResult {
  std::vector<double> x;
  std::vector<double> gradient;
  double value = 0.0;
  double grad_inf_norm = 0.0;
  LbfgsStatus status = LbfgsStatus::kIterationCap;
  int iterations = 0;
  std::vector<LbfgsIteration> trace;
};

/// Called after every accepted iteration with the new iterate; the time spent
/// inside the observer is not charged to any phase.
using LbfgsObserver = std::function<void(const LbfgsIteration&, std::span<const double> x)>;

/// Algorithm outline: direction from the two-loop recursion, Wolfe step,
/// store (s, y), stop when |grad|_inf < grad_tol. A failed line search clears
/// the history and retries along -grad once; a second failure stops with
/// kLineSearchFailed.
LbfgsResult minimize(const ValueGradient& f, std::span<const double> x0,
                     const LbfgsConfig& config, const LbfgsObserver& observer = {});

}  // namespace bsfit
