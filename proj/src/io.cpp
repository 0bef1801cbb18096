#include "bsfit/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bsfit {

namespace {

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

// Next non-blank, comment-stripped line; throws at end of input.
std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    line = strip_comment(line);
    if (!blank(line)) return line;
  }
  throw InputError(std::string("curve file: missing ") + what);
}

template <class T>
T keyed(std::istream& in, const std::string& key) {
  std::istringstream ls(next_line(in, key.c_str()));
  std::string k;
  T v{};
  if (!(ls >> k >> v) || k != key) throw InputError("curve file: expected '" + key + "'");
  return v;
}

}  // namespace

std::vector<Vec2> parse_points(std::istream& in) {
  std::vector<Vec2> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_comment(line);
    if (blank(line)) continue;
    std::istringstream ls(line);
    Vec2 p;
    std::string extra;
    if (!(ls >> p.x >> p.y) || (ls >> extra) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InputError("point file line " + std::to_string(lineno) + ": expected 'x y'");
    }
    pts.push_back(p);
  }
  return pts;
}

std::vector<Vec2> read_points(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_points(in);
}

void write_points(std::ostream& out, const std::vector<Vec2>& points) {
  out << std::setprecision(17);
  for (Vec2 p : points) out << p.x << ' ' << p.y << '\n';
}

void write_points(const std::string& path, const std::vector<Vec2>& points) {
  std::ofstream out = open_out(path);
  write_points(out, points);
}

void write_curve(std::ostream& out, const BSplineCurve& curve) {
  out << std::setprecision(17);
  out << "bsfit-curve 1\n";
  out << "degree " << curve.degree() << '\n';
  out << "closed " << (curve.closed() ? 1 : 0) << '\n';
  out << "knots " << curve.knots().size() << '\n';
  for (double k : curve.knots()) out << k << '\n';
  out << "control_points " << curve.size() << '\n';
  for (Vec2 p : curve.control_points()) out << p.x << ' ' << p.y << '\n';
}

void write_curve(const std::string& path, const BSplineCurve& curve) {
  std::ofstream out = open_out(path);
  write_curve(out, curve);
}

BSplineCurve parse_curve(std::istream& in) {
  if (keyed<int>(in, "bsfit-curve") != 1) throw InputError("curve file: unsupported version");
  const int degree = keyed<int>(in, "degree");
  const int closed = keyed<int>(in, "closed");
  const auto knot_count = keyed<std::size_t>(in, "knots");
  std::vector<double> knots(knot_count);
  for (double& k : knots) {
    std::istringstream ls(next_line(in, "knot"));
    if (!(ls >> k)) throw InputError("curve file: bad knot");
  }
  const int n = keyed<int>(in, "control_points");
  if (n < 1) throw InputError("curve file: bad control point count");
  std::vector<Vec2> ctrl(static_cast<std::size_t>(n));
  for (Vec2& p : ctrl) {
    std::istringstream ls(next_line(in, "control point"));
    if (!(ls >> p.x >> p.y)) throw InputError("curve file: bad control point");
  }
  BSplineCurve curve = [&] {
    try {
      return make_uniform_curve(n, degree, closed != 0, std::move(ctrl));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("curve file: ") + e.what());
    }
  }();
  const auto expected = curve.knots();
  bool same = expected.size() == knots.size();
  for (std::size_t i = 0; same && i < knots.size(); ++i) same = std::fabs(expected[i] - knots[i]) <= 1e-12;
  if (!same) throw InputError("curve file: knots are not the uniform knot vector");
  return curve;
}

BSplineCurve read_curve(const std::string& path) {
  std::ifstream in = open_in(path);
  return parse_curve(in);
}

void write_trace_csv(std::ostream& out, const FitTrace& trace) {
  out << kTraceVersion << '\n' << kTraceHeader << '\n';
  out << std::setprecision(17);
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << ',' << r.elapsed << ',' << r.error << ',' << r.grad_inf_norm << '\n';
  }
  out.flush();
}

void write_svg(std::ostream& out, const std::vector<Vec2>& points, const BSplineCurve* curve,
               int samples, int size) {
  samples = std::max(samples, 256);
  const double margin = 0.05 * size;
  const double scale = size - 2.0 * margin;
  auto sx = [&](double x) { return margin + scale * x; };
  auto sy = [&](double y) { return size - (margin + scale * y); };
  out << std::setprecision(6) << std::fixed;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << ' ' << size << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (curve) {
    out << "<polyline fill=\"none\" stroke=\"#c03020\" stroke-width=\"1.5\" points=\"";
    // Closed curves repeat the start so the drawn loop is closed.
    const int count = curve->closed() ? samples + 1 : samples;
    for (int i = 0; i < count; ++i) {
      const double t = curve->closed() ? static_cast<double>(i) / samples
                                       : static_cast<double>(i) / (samples - 1);
      const Vec2 p = curve->evaluate(t);
      out << sx(p.x) << ',' << sy(p.y) << (i + 1 < count ? " " : "");
    }
    out << "\"/>\n";
  }
  for (Vec2 p : points) {
    out << "<circle class=\"pt\" cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
        << "\" r=\"2\" fill=\"#2050a0\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace bsfit
