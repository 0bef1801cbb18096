#pragma once

#include <optional>
#include <vector>

#include "bsfit/bspline.hpp"
#include "bsfit/footpoint.hpp"
#include "bsfit/lbfgs.hpp"
#include "bsfit/objective.hpp"
#include "bsfit/trace.hpp"

namespace bsfit {

struct LbfgsFitOptions {
  double restart_tol = 1e-6;  // on |E - E+| across a foot-point correction
  int max_restarts = 5;
  ProjectionOptions projection;
  /// Location parameters to start from instead of projecting the initial
  /// curve. Used to reproduce a given (possibly poor) initialization.
  std::optional<std::vector<double>> initial_params;
};

/// Joint L-BFGS fit over control points and location parameters.
///
/// After each L-BFGS run the foot points are recomputed at fixed control
/// points. When the RMS error changes by more than restart_tol a new run
/// starts from the corrected parameters with an empty history. Hitting
/// max_restarts with the correction still active gives
/// FitStatus::kStuckAtLocalMinimum.
///
/// Trace timing: Phase::kGradient holds the objective/gradient evaluation at
/// the first trial step, kDirection the two-loop recursion and history
/// update, kLineSearch the extra trials. Corrective projections go to
/// trace.correction_seconds; the error column is evaluated outside the
/// timers.
FitResult fit_lbfgs(const FitProblem& problem, const BSplineCurve& initial,
                    const LbfgsConfig& config = {}, const LbfgsFitOptions& options = {});

/// Starting curve for a problem. Closed: control points evenly spaced on a
/// circle around the bounding-box centre with radius 0.6 x bbox diagonal
/// (longest side only when the diagonal vanishes in one axis). Open: evenly
/// spaced along the principal axis, spanning the data's extent.
/// Throws std::invalid_argument when n < degree + 1.
BSplineCurve default_initial_curve(const FitProblem& problem, int n);

}  // namespace bsfit
