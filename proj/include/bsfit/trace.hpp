#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bsfit/bspline.hpp"

namespace bsfit {

enum class Method { kLbfgs, kPdm, kTdmlm, kSdm };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

enum class Phase : std::size_t {
  kMatrixFilling,
  kMatrixSolving,
  kFootpointProjection,
  kGradient,
  kDirection,
  kLineSearch,
};

inline constexpr std::size_t kPhaseCount = 6;
using PhaseTimes = std::array<double, kPhaseCount>;

std::string_view to_string(Phase phase);

inline double& at(PhaseTimes& t, Phase p) { return t[static_cast<std::size_t>(p)]; }
inline double at(const PhaseTimes& t, Phase p) { return t[static_cast<std::size_t>(p)]; }

struct TraceRecord {
  int iteration = 0;
  double elapsed = 0.0;  // seconds of solver work since the start of the fit
  double error = 0.0;    // RMS fitting error
  double grad_inf_norm = 0.0;
  PhaseTimes phases{};
  double wall_seconds = 0.0;  // independently measured iteration time

  double iteration_seconds() const;
};

/// Foot-point correction after an L-BFGS run: RMS error at fixed control
/// points before and after recomputing the foot points.
struct CorrectionEvent {
  int after_iteration = 0;
  double error_before = 0.0;
  double error_after = 0.0;
  bool restarted = false;
};

struct FitTrace {
  std::vector<TraceRecord> records;
  std::vector<CorrectionEvent> corrections;
  int restarts = 0;
  int footpoint_initializations = 0;
  double setup_seconds = 0.0;       // initial foot-point projection
  double correction_seconds = 0.0;  // projections between L-BFGS runs
  int clamp_events = 0;

  PhaseTimes phase_totals() const;
  /// Mean of iteration_seconds() over the first `count` records.
  double mean_iteration_seconds(std::size_t count = static_cast<std::size_t>(-1)) const;
  double total_seconds() const { return records.empty() ? setup_seconds : records.back().elapsed; }

  /// Appends a record, forcing elapsed to be strictly increasing.
  void push(TraceRecord record);
};

enum class FitStatus {
  kConverged,
  kIterationCap,
  kLineSearchFailed,
  kNonFinite,
  kDiverged,
  kSolveFailed,
  kStuckAtLocalMinimum,
};

std::string_view to_string(FitStatus status);

struct FitResult {
  FitResult(Method m, BSplineCurve c) : method(m), curve(std::move(c)) {}

  Method method = Method::kLbfgs;
  BSplineCurve curve;
  std::vector<double> params;
  FitTrace trace;
  FitStatus status = FitStatus::kIterationCap;
  std::string message;
  double final_error = 0.0;
  double final_grad_inf_norm = 0.0;
};

}  // namespace bsfit
