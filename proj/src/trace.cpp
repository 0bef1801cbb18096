#include "bsfit/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bsfit {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kLbfgs: return "lbfgs";
    case Method::kPdm: return "pdm";
    case Method::kTdmlm: return "tdmlm";
    case Method::kSdm: return "sdm";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::kLbfgs, Method::kPdm, Method::kTdmlm, Method::kSdm}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kMatrixFilling: return "matrix_filling";
    case Phase::kMatrixSolving: return "matrix_solving";
    case Phase::kFootpointProjection: return "footpoint_projection";
    case Phase::kGradient: return "gradient";
    case Phase::kDirection: return "direction";
    case Phase::kLineSearch: return "linesearch";
  }
  return "unknown";
}

std::string_view to_string(FitStatus status) {
  switch (status) {
    case FitStatus::kConverged: return "converged";
    case FitStatus::kIterationCap: return "iteration_cap";
    case FitStatus::kLineSearchFailed: return "linesearch_failed";
    case FitStatus::kNonFinite: return "non_finite";
    case FitStatus::kDiverged: return "diverged";
    case FitStatus::kSolveFailed: return "solve_failed";
    case FitStatus::kStuckAtLocalMinimum: return "stuck_at_local_minimum";
  }
  return "unknown";
}

double TraceRecord::iteration_seconds() const {
  double s = 0.0;
  for (double v : phases) s += v;
  return s;
}

PhaseTimes FitTrace::phase_totals() const {
  PhaseTimes t{};
  for (const TraceRecord& r : records) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) t[i] += r.phases[i];
  }
  return t;
}

double FitTrace::mean_iteration_seconds(std::size_t count) const {
  const std::size_t k = std::min(count, records.size());
  if (k == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += records[i].iteration_seconds();
  return s / static_cast<double>(k);
}

void FitTrace::push(TraceRecord record) {
  if (!records.empty()) {
    const TraceRecord& last = records.back();
    if (record.iteration <= last.iteration) record.iteration = last.iteration + 1;
    if (!(record.elapsed > last.elapsed)) {
      record.elapsed = std::nextafter(last.elapsed, std::numeric_limits<double>::infinity());
    }
  }
  records.push_back(record);
}

}  // namespace bsfit
