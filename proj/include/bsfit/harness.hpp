#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bsfit/shapes.hpp"
#include "bsfit/trace.hpp"

namespace bsfit {

struct RunConfig {
  Method method = Method::kLbfgs;
  int n_ctrl = 8;
  int degree = 3;
  bool closed = true;
  double alpha = 0.0;
  double beta = 0.0;
  int m = 20;
  double c1 = 1e-4;
  double c2 = 0.9;
  double grad_tol = 1e-8;
  int max_iter = 1000;
  double restart_tol = 1e-6;
  int samples_per_span = 32;

  ShapeSpec shape;                  // used when input is empty
  std::string input;                // point file
  std::string initial_curve;        // optional curve file, raw coordinates
  std::string trace_csv;            // "-" for stdout
  std::string curve_out;
  std::string svg_out;

  /// Throws std::invalid_argument for out-of-range values.
  void validate() const;
};

/// Points, normalization and fit of one run. Fitting happens in unit-box
/// coordinates (see normalize_points); `raw_curve` maps the result back.
struct RunOutcome {
  std::vector<Vec2> raw_points;
  std::vector<Vec2> unit_points;
  FitResult fit;
  BSplineCurve raw_curve;
};

RunOutcome run_fit(const RunConfig& config);

/// Phase shares in percent. Alternating methods: matrix filling, matrix
/// solving, foot-point projection. L-BFGS: descent direction (gradient plus
/// two-loop recursion) and line search.
std::vector<std::pair<std::string, double>> phase_breakdown(const FitResult& fit);

/// One line: method, status, iterations, final error, final gradient norm,
/// total and mean per-iteration seconds, restarts, phase percentages.
std::string summary_line(const FitResult& fit);

/// Runs one configuration and writes the requested outputs. The trace CSV is
/// written even when the fit stops early. Returns the fit result.
FitResult run_and_trace(const RunConfig& config, std::ostream& log);

enum class ScalingAxis { kDataPoints, kControlPoints };

struct ScalingRow {
  Method method = Method::kLbfgs;
  int level = 0;
  double mean_iteration_seconds = 0.0;  // paired-ratio median, see benchmark_scaling
  int iterations = 0;                   // iterations entering the mean
  double final_error = 0.0;
  FitStatus status = FitStatus::kIterationCap;
  std::string error;  // non-empty when the run threw
};

struct ScalingOptions {
  ScalingAxis axis = ScalingAxis::kDataPoints;
  std::vector<int> levels;
  std::vector<Method> methods{Method::kLbfgs, Method::kPdm, Method::kTdmlm, Method::kSdm};
  int window = 50;   // iterations entering the per-iteration mean
  int repeats = 3;  // per cell, interleaved
};

/// For every level and method: generates the data from base.shape (count
/// replaced by the level on the data-point axis, n_ctrl replaced on the
/// control-point axis), fits with at most `window` iterations and records the
/// mean per-iteration time. Each repeat runs every cell once, method by
/// method, before the next repeat starts. The first level reports its median
/// time; each later level reports that median times the median over repeats
/// of its time relative to the first level in the same repeat. Failures are recorded in
/// the row and that cell is skipped from then on.
std::vector<ScalingRow> benchmark_scaling(const RunConfig& base, const ScalingOptions& options);

void write_scaling_csv(std::ostream& out, const std::vector<ScalingRow>& rows);

}  // namespace bsfit
