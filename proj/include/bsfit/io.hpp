#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsfit/bspline.hpp"
#include "bsfit/trace.hpp"

namespace bsfit {

/// Unreadable or malformed input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point files: one "x y" pair per line, '#' starts a comment, blank lines are
// ignored. Written with 17 significant digits so a round trip is exact.

std::vector<Vec2> parse_points(std::istream& in);
/// Throws InputError when the file cannot be opened or a line does
/// not hold exactly two finite numbers.
std::vector<Vec2> read_points(const std::string& path);
void write_points(std::ostream& out, const std::vector<Vec2>& points);
void write_points(const std::string& path, const std::vector<Vec2>& points);

// Curve files:
//   bsfit-curve 1
//   degree <p>
//   closed <0|1>
//   knots <count>
//   <knot> ... (one per line)
//   control_points <n>
//   <x> <y> (one per line)
// Knots are written for reference; the reader checks them against the
// uniform knot vector implied by degree, closedness and n.

void write_curve(std::ostream& out, const BSplineCurve& curve);
void write_curve(const std::string& path, const BSplineCurve& curve);
BSplineCurve parse_curve(std::istream& in);
BSplineCurve read_curve(const std::string& path);

inline constexpr const char* kTraceHeader = "iter,elapsed_s,error,grad_inf_norm";
inline constexpr const char* kTraceVersion = "# bsfit-trace v1";

/// Version comment, header, one row per record.
void write_trace_csv(std::ostream& out, const FitTrace& trace);

/// SVG with one circle marker per data point and a single polyline of
/// `samples` curve points (at least 256). Unit-box coordinates are mapped to
/// a size x size canvas with y pointing up.
void write_svg(std::ostream& out, const std::vector<Vec2>& points, const BSplineCurve* curve,
               int samples = 512, int size = 512);

}  // namespace bsfit
