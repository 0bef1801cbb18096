#pragma once

#include <span>
#include <vector>

#include "bsfit/bspline.hpp"

namespace bsfit {

struct ProjectionOptions {
  int samples_per_span = 32;
  int max_iterations = 100;
  double tolerance = 1e-10;  // on |(X - P(t)) . P'(t)|
  int max_halvings = 30;
};

enum class FootpointStatus {
  kConverged,
  kBoundary,      // open curve, minimum at an end point
  kNotConverged,  // iteration cap or no further decrease
};

struct FootpointResult {
  double t = 0.0;
  double distance = 0.0;
  double residual = 0.0;  // |(X - P(t)) . P'(t)|
  int iterations = 0;
  FootpointStatus status = FootpointStatus::kNotConverged;

  bool flagged() const { return status != FootpointStatus::kConverged; }
};

/// Newton-type refinement of one location parameter.
///
/// Steps t += a * dt with dt = (X - P) . P' / h, where h = |P'|^2 - (X - P) . P''
/// when that is safely positive and h = |P'|^2 (Gauss-Newton) otherwise,
/// halving a from 1 until the distance to X decreases. Stops once the orthogonality residual is
/// below the tolerance. When |P'| < 1e-14 the active span is searched by
/// golden section instead.
FootpointResult refine_footpoint(const BSplineCurve& curve, Vec2 x, double t0,
                                 const ProjectionOptions& options = {});

/// Dense samples of a curve, samples_per_span per knot span, stored as
/// separate coordinate arrays for the nearest-sample kernel.
struct CurveSamples {
  std::vector<double> t;
  std::vector<double> x;
  std::vector<double> y;
};

CurveSamples sample_curve(const BSplineCurve& curve, int samples_per_span);

struct ProjectionResult {
  std::vector<double> t;
  std::vector<FootpointResult> details;
  int flagged = 0;
};

/// Seeds every point from its nearest dense sample (lowest index on ties) and
/// refines. Other local minima of the sampled distance that could still hold
/// a closer point (sampled distance within two local sample gaps of the best
/// refined distance) are refined as well; the closest result wins, the
/// nearest-sample one on ties.
ProjectionResult project_all(const BSplineCurve& curve, std::span<const Vec2> points,
                             const ProjectionOptions& options = {});

/// Refines from the given seeds without dense sampling.
ProjectionResult project_from_seeds(const BSplineCurve& curve, std::span<const Vec2> points,
                                    std::span<const double> seeds,
                                    const ProjectionOptions& options = {});

/// Local frame at P(t) used by the squared-distance error term.
///
/// `normal` is the unit principal normal, pointing towards the centre of
/// curvature; on a straight piece it is the left normal of the tangent.
/// signed_distance = +|X - P| when X lies on the normal side (towards the
/// centre of curvature), -|X - P| otherwise.
struct FootpointFrame {
  double t = 0.0;
  Vec2 point;
  Vec2 tangent;
  Vec2 normal;
  double curvature_radius = 0.0;  // +inf on straight pieces
  double signed_distance = 0.0;
};

/// Throws std::invalid_argument for degree < 2 and std::domain_error for a
/// degenerate tangent.
FootpointFrame frame_at(const BSplineCurve& curve, double t, Vec2 x);

/// |E_curr - E_prev| / E_curr > 0.2; false for a perfect fit (E_curr == 0).
bool should_reinitialize(double error_prev, double error_curr);

}  // namespace bsfit
