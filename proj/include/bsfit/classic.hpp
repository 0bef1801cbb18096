#pragma once

#include <span>
#include <vector>

#include "bsfit/banded.hpp"
#include "bsfit/bspline.hpp"
#include "bsfit/footpoint.hpp"
#include "bsfit/objective.hpp"
#include "bsfit/trace.hpp"

namespace bsfit {

/// Q(P) = 1/2 P^T A P - b^T P + c over interleaved control coordinates.
///
/// Q is built so that Q(P) = 1/2 sum_k e_k(P) + fairing(P), i.e. it has the
/// same scaling as the joint objective, whose data term carries the 1/2.
struct QuadraticModel {
  BlockBandMatrix a;
  std::vector<double> b;
  double c = 0.0;
  int fallback_points = 0;       // TDM/SDM terms replaced by the point term
  int clamped_coefficients = 0;  // SDM points beyond the curvature centre

  int control_count() const { return a.blocks(); }
  double evaluate(std::span<const double> coords) const;
  /// A P - b.
  std::vector<double> gradient(std::span<const double> coords) const;
};

/// Point-distance model: e_k = |P(t_k) - X_k|^2.
QuadraticModel assemble_pdm(const JointObjective& objective, const BSplineCurve& curve,
                            std::span<const double> params);

/// Tangent-distance model: e_k = ((P(t_k) - X_k) . N_k)^2 with N_k the unit
/// normal at the current curve.
QuadraticModel assemble_tdm(const JointObjective& objective, const BSplineCurve& curve,
                            std::span<const double> params);

/// Squared-distance model. With signed distance d (negative away from the
/// centre of curvature) and curvature radius rho:
///   d < 0       : d/(d - rho) ((P - X) . T)^2 + ((P - X) . N)^2
///   0 <= d < rho: ((P - X) . N)^2
///   d >= rho    : tangential coefficient clamped to 1
QuadraticModel assemble_sdm(const JointObjective& objective, const BSplineCurve& curve,
                            std::span<const double> params);

/// Tangential weight of the squared-distance term for one point.
double sdm_tangent_weight(double signed_distance, double curvature_radius, bool* clamped = nullptr);

/// tr(A) / (80 n).
double tdmlm_mu(const QuadraticModel& model, int n);

/// Solves (A + mu I) P = b + mu * anchor with mu = tr(A) / (80 n). With an
/// empty anchor this is the plain shifted system; passing the current control
/// coordinates damps the step towards them instead of towards the origin.
/// Throws std::runtime_error if the factorization fails.
std::vector<double> solve_tdmlm_step(const QuadraticModel& model, int n,
                                     std::span<const double> anchor = {});

/// Minimizer of the model with the tiny ridge 1e-12 tr(A)/(2n) that keeps
/// rank-deficient point models factorizable. Throws std::runtime_error on
/// failure.
std::vector<double> solve_model(const QuadraticModel& model);

struct AlternatingConfig {
  int max_iterations = 200;
  double grad_tol = 1e-8;
  double divergence_factor = 10.0;
  ProjectionOptions projection;
};

/// Alternates control-point updates (assemble + solve) with foot-point
/// projection. Foot points are refined from the previous iteration's values;
/// when the resulting fitting error differs from the previous one by more
/// than should_reinitialize allows, they are recomputed from dense samples.
///
/// The initial dense projection is charged to trace.setup_seconds. Each trace
/// record covers one control-point update plus the projection that follows
/// it; error and gradient are measured afterwards, outside the timers.
FitResult run_alternating(Method method, const FitProblem& problem, const BSplineCurve& initial,
                          const AlternatingConfig& config = {});

}  // namespace bsfit
