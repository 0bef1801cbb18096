#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

namespace bsfit {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
  constexpr Vec2& operator+=(Vec2 b) {
    x += b.x;
    y += b.y;
    return *this;
  }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double squared_norm(Vec2 a) { return dot(a, a); }

inline constexpr int kMaxDegree = 9;

/// Degree, control-point count and closedness; everything the fixed uniform
/// knot vector depends on.
struct CurveTopology {
  int n = 0;
  int degree = 3;
  bool closed = true;

  friend bool operator==(const CurveTopology&, const CurveTopology&) = default;
};

/// Output of one Cox-de Boor evaluation: the p+1 non-zero basis functions on
/// a knot span and their first two derivatives. Entry i belongs to control
/// point `SplineBasis::control_index(span, i)`.
struct SpanEvaluation {
  int span = 0;
  std::array<double, kMaxDegree + 1> basis{};
  std::array<double, kMaxDegree + 1> d1{};
  std::array<double, kMaxDegree + 1> d2{};
};

/// Uniform knot vector on [0,1] plus basis evaluation.
///
/// Open curves use a clamped knot vector (end knots repeated p+1 times).
/// Closed curves use an unclamped uniform knot vector extended by p knots on
/// each side; basis function j drives control point j mod n, so P(0) == P(1)
/// holds by construction and the number of free control points stays n.
class SplineBasis {
 public:
  explicit SplineBasis(CurveTopology topology);

  const CurveTopology& topology() const { return topology_; }
  int degree() const { return topology_.degree; }
  int size() const { return topology_.n; }
  bool closed() const { return topology_.closed; }
  std::span<const double> knots() const { return knots_; }

  /// Number of non-degenerate knot spans inside [0,1].
  int span_count() const { return basis_count_ - topology_.degree; }
  /// Parameter interval of the k-th span inside [0,1], k in [0, span_count()).
  std::pair<double, double> span_interval(int k) const;

  /// Closed: t mod 1 in [0,1). Open: t clamped to [0,1].
  double to_domain(double t) const;
  bool in_domain(double t) const { return t >= 0.0 && t <= 1.0; }

  /// Knot span containing a parameter already mapped by to_domain().
  int find_span(double u) const;

  int control_index(int span, int i) const {
    const int j = span - topology_.degree + i;
    return j < topology_.n ? j : j - topology_.n;
  }

  /// Basis values on the span of t; derivatives up to `order` (0..2).
  SpanEvaluation evaluate(double t, int order = 0) const;

 private:
  CurveTopology topology_;
  int basis_count_ = 0;  // n (open) or n + p (closed)
  std::vector<double> knots_;
};

/// Point and first two derivatives of a curve at one parameter.
struct CurveJet {
  Vec2 point;
  Vec2 d1;
  Vec2 d2;
};

/// Planar B-spline curve on a fixed uniform knot vector. Immutable.
class BSplineCurve {
 public:
  BSplineCurve(CurveTopology topology, std::vector<Vec2> control_points);
  BSplineCurve(std::shared_ptr<const SplineBasis> basis, std::vector<Vec2> control_points);

  const SplineBasis& basis() const { return *basis_; }
  std::shared_ptr<const SplineBasis> shared_basis() const { return basis_; }
  const CurveTopology& topology() const { return basis_->topology(); }
  int degree() const { return basis_->degree(); }
  int size() const { return basis_->size(); }
  bool closed() const { return basis_->closed(); }
  std::span<const double> knots() const { return basis_->knots(); }
  std::span<const Vec2> control_points() const { return control_points_; }

  Vec2 evaluate(double t) const;
  /// Throws std::invalid_argument for degree < 2, where P'' is not available.
  CurveJet evaluate_jet(double t) const;
  /// Point and first derivative only; valid for every degree.
  CurveJet evaluate_d1(double t) const;

  BSplineCurve with_control_points(std::vector<Vec2> control_points) const {
    return BSplineCurve(basis_, std::move(control_points));
  }

 private:
  std::shared_ptr<const SplineBasis> basis_;
  std::vector<Vec2> control_points_;
};

/// Builds a curve on uniform knots over [0,1]. Rejects n < p + 1 and
/// non-finite coordinates.
BSplineCurve make_uniform_curve(int n, int degree, bool closed, std::vector<Vec2> init_points);

}  // namespace bsfit
