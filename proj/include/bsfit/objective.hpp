#pragma once

#include <span>
#include <vector>

#include "bsfit/bspline.hpp"

namespace bsfit {

/// Data points plus fairing weights and the topology of the fitting curve.
/// Points are expected in unit-box coordinates (see normalize_points).
struct FitProblem {
  std::vector<Vec2> points;
  double alpha = 0.0;  // weight on the integral of |P'|^2
  double beta = 0.0;   // weight on the integral of |P''|^2
  CurveTopology topology;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Uniform scale plus translation taking raw coordinates into the unit box.
/// unit = (raw - offset) * scale.
struct AffineTransform {
  double scale = 1.0;
  Vec2 offset;

  Vec2 to_unit(Vec2 raw) const { return (raw - offset) * scale; }
  Vec2 to_raw(Vec2 unit) const { return unit * (1.0 / scale) + offset; }
};

struct NormalizedPoints {
  std::vector<Vec2> points;
  AffineTransform transform;
};

/// Maps the bounding box into [0,1]^2 preserving aspect ratio: the longer side
/// spans [0,1] and the shorter one is centred. Throws when all points
/// coincide.
NormalizedPoints normalize_points(std::span<const Vec2> raw);

/// Gram matrices of the derivative basis; n x n, row-major.
struct FairingGrams {
  int n = 0;
  std::vector<double> gram_d1;  // integral of N_i' N_j'
  std::vector<double> gram_d2;  // integral of N_i'' N_j''

  double d1(int i, int j) const { return gram_d1[static_cast<std::size_t>(i * n + j)]; }
  double d2(int i, int j) const { return gram_d2[static_cast<std::size_t>(i * n + j)]; }
};

/// Exact per-span Gauss-Legendre integration. gram_d2 is zero for degree 1.
FairingGrams build_fairing_grams(const SplineBasis& basis);

/// Gauss-Legendre nodes and weights on [-1,1].
void gauss_legendre(int count, std::vector<double>& nodes, std::vector<double>& weights);

// Joint variable vector: [P1.x, P1.y, ..., Pn.x, Pn.y, t1, ..., tN].

std::vector<double> pack_state(std::span<const Vec2> control_points, std::span<const double> params);
std::vector<Vec2> unpack_control_points(std::span<const double> state, int n);

/// Parts of one objective evaluation.
struct ObjectiveParts {
  double value = 0.0;
  double data_term = 0.0;     // 1/2 sum |P(t_k) - X_k|^2
  double fairing_term = 0.0;  // alpha * Q1 + beta * Q2
  int clamped = 0;            // open curves: parameters outside [0,1]
};

/// The joint fitting objective over control points and location parameters.
///
/// f = 1/2 sum_k |P(t_k) - X_k|^2 + alpha * int |P'|^2 + beta * int |P''|^2.
///
/// Fairing is a precomputed banded quadratic form in the control points, so
/// an evaluation costs one basis evaluation per data point plus O(n p).
class JointObjective {
 public:
  explicit JointObjective(FitProblem problem);

  const FitProblem& problem() const { return problem_; }
  const SplineBasis& basis() const { return *basis_; }
  std::shared_ptr<const SplineBasis> shared_basis() const { return basis_; }
  const FairingGrams& grams() const { return grams_; }
  int control_count() const { return problem_.topology.n; }
  std::size_t point_count() const { return problem_.points.size(); }
  std::size_t dimension() const { return 2 * static_cast<std::size_t>(control_count()) + point_count(); }

  ObjectiveParts evaluate(std::span<const double> state) const;
  /// Fills `grad` (same length as state). Throws std::runtime_error on a
  /// non-finite result.
  ObjectiveParts evaluate(std::span<const double> state, std::span<double> grad) const;

  double value(std::span<const double> state) const { return evaluate(state).value; }
  double value_and_gradient(std::span<const double> state, std::span<double> grad) const {
    return evaluate(state, grad).value;
  }

  /// Root-mean-square residual; excludes fairing.
  double fitting_error(std::span<const double> state) const;

  /// alpha * P^T G1 P + beta * P^T G2 P for interleaved control coordinates.
  double fairing_energy(std::span<const double> control_coords) const;
  /// Adds the fairing gradient 2 alpha G1 P + 2 beta G2 P.
  void add_fairing_gradient(std::span<const double> control_coords, std::span<double> grad) const;

  BSplineCurve curve_from_state(std::span<const double> state) const;

 private:
  void check_dimension(std::span<const double> state) const;

  struct BandEntry {
    int col;
    double g1;
    double g2;
  };

  FitProblem problem_;
  std::shared_ptr<const SplineBasis> basis_;
  FairingGrams grams_;
  std::vector<std::vector<BandEntry>> band_;  // non-zero gram entries by row
};

// Free-function forms.

double objective_value(const FitProblem& problem, std::span<const double> state);
std::vector<double> objective_gradient(const FitProblem& problem, std::span<const double> state);
double fitting_error(const FitProblem& problem, std::span<const double> state);

/// sqrt(mean |r_k|^2) over a list of residual vectors.
double rms_error(std::span<const Vec2> residuals);

}  // namespace bsfit
