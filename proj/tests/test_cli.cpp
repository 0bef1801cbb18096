#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsfit/harness.hpp"
#include "bsfit/io.hpp"
#include "bsfit/objective.hpp"
#include "bsfit/shapes.hpp"

using namespace bsfit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bsfit_test_cli";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Arc-length coordinate of a point lying on the closed polygon.
double arc_coordinate(const std::vector<Vec2>& poly, Vec2 x) {
  double s = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double len = norm(b - a);
    const double u = std::clamp(dot(x - a, b - a) / (len * len), 0.0, 1.0);
    if (norm(a + u * (b - a) - x) < 1e-12 && u < 1.0) return s + u * len;
    s += len;
  }
  return -1.0;
}

RunConfig quick(Method m, ShapeKind shape, int n) {
  RunConfig c;
  c.method = m;
  c.shape.kind = shape;
  c.n_ctrl = n;
  return c;
}

}  // namespace

TEST_CASE("shape generators") {
  SUBCASE("circle") {
    ShapeSpec s;
    s.count = 100;
    const auto pts = generate_shape(s);
    REQUIRE(pts.size() == 100);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      CHECK(std::fabs(norm(pts[k] - kShapeCentre) - kCircleRadius) < 1e-12);
      const double a = std::atan2(pts[k].y - 0.5, pts[k].x - 0.5);
      const double want = 2.0 * std::numbers::pi * static_cast<double>(k) / 100.0;
      CHECK(std::fabs(std::remainder(a - want, 2.0 * std::numbers::pi)) < 1e-12);
    }
  }
  SUBCASE("noise is seeded") {
    ShapeSpec s;
    s.kind = ShapeKind::kNoisyCircle;
    s.count = 150;
    s.noise_sigma = 0.01;
    s.seed = 7;
    const auto a = generate_shape(s);
    const auto b = generate_shape(s);
    CHECK(a == b);
    s.seed = 8;
    CHECK(generate_shape(s) != a);
    // Sample standard deviation of the radial offset is close to sigma.
    double sum2 = 0.0;
    for (Vec2 p : a) sum2 += std::pow(norm(p - kShapeCentre) - kCircleRadius, 2);
    const double sd = std::sqrt(sum2 / static_cast<double>(a.size()));
    CHECK(sd > 0.007);
    CHECK(sd < 0.013);
  }
  SUBCASE("star: equal arc-length spacing") {
    const auto poly = star_vertices();
    REQUIRE(poly.size() == 2 * static_cast<std::size_t>(kStarTips));
    CHECK(norm(poly[0] - kShapeCentre) == doctest::Approx(kStarOuter));
    CHECK(norm(poly[1] - kShapeCentre) == doctest::Approx(kStarInner));
    CHECK(poly[0].y > 0.5);
    double perimeter = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) perimeter += norm(poly[(i + 1) % poly.size()] - poly[i]);
    ShapeSpec s;
    s.kind = ShapeKind::kStar;
    s.count = 137;
    const auto pts = generate_shape(s);
    REQUIRE(pts.size() == 137);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      CHECK(arc_coordinate(poly, pts[k]) == doctest::Approx(perimeter * static_cast<double>(k) / 137.0).epsilon(1e-12));
    }
  }
  SUBCASE("errors") {
    ShapeSpec s;
    s.count = 0;
    CHECK_THROWS_AS(generate_shape(s), std::invalid_argument);
    s.count = 5;
    s.noise_sigma = -1.0;
    CHECK_THROWS_AS(generate_shape(s), std::invalid_argument);
    s.noise_sigma = 0.0;
    s.kind = ShapeKind::kFromFile;
    s.path = scratch("missing.txt").string();
    CHECK_THROWS_AS(generate_shape(s), InputError);
  }
  CHECK(parse_shape("noisy_circle") == ShapeKind::kNoisyCircle);
  CHECK_FALSE(parse_shape("square").has_value());
  CHECK(to_string(ShapeKind::kStar) == "star");
}

TEST_CASE("point files") {
  ShapeSpec s;
  s.kind = ShapeKind::kNoisyCircle;
  s.noise_sigma = 0.03;
  s.count = 64;
  const auto pts = generate_shape(s);
  const fs::path p = scratch("points.txt");
  write_points(p.string(), pts);
  CHECK(read_points(p.string()) == pts);

  std::istringstream ok("# header\n\n1 2\n  3.5\t-4e-3  # trailing\n");
  const auto parsed = parse_points(ok);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[1].x == 3.5);
  CHECK(parsed[1].y == -4e-3);
  for (const char* bad : {"1\n", "1 2 3\n", "1 x\n", "nan 1\n", "1 inf\n"}) {
    std::istringstream in(bad);
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_points(in), InputError);
  }
  CHECK_THROWS_AS(read_points(scratch("nope.txt").string()), InputError);
}

TEST_CASE("curve files") {
  const BSplineCurve c =
      make_uniform_curve(6, 3, true, {{0.1, 0.2}, {0.7, 0.1}, {0.9, 0.5}, {0.6, 0.9}, {0.2, 0.8}, {1.0 / 3.0, 0.5}});
  std::stringstream s;
  write_curve(s, c);
  const BSplineCurve back = parse_curve(s);
  CHECK(back.topology() == c.topology());
  for (int i = 0; i < 6; ++i) {
    CHECK(back.control_points()[static_cast<std::size_t>(i)].x == c.control_points()[static_cast<std::size_t>(i)].x);
    CHECK(back.control_points()[static_cast<std::size_t>(i)].y == c.control_points()[static_cast<std::size_t>(i)].y);
  }
  const std::string text = s.str();
  CHECK(text.rfind("bsfit-curve 1\n", 0) == 0);
  // A knot that does not match the uniform vector is rejected.
  std::string broken = text;
  broken.replace(broken.find("knots"), 0, "");
  const auto pos = broken.find('\n', broken.find("knots"));
  broken.insert(pos + 1, "0.123\n");
  std::istringstream bad(broken);
  CHECK_THROWS_AS(parse_curve(bad), InputError);
  std::istringstream junk("hello\n");
  CHECK_THROWS_AS(parse_curve(junk), InputError);
}

TEST_CASE("trace csv") {
  FitTrace t;
  for (int i = 1; i <= 3; ++i) {
    TraceRecord r;
    r.iteration = i;
    r.elapsed = 0.1 * i;
    r.error = 1.0 / i;
    r.grad_inf_norm = 1e-3 / i;
    t.push(r);
  }
  std::ostringstream out;
  write_trace_csv(out, t);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == kTraceVersion);
  CHECK(lines[1] == kTraceHeader);
  CHECK(lines[2].rfind("1,", 0) == 0);
}

TEST_CASE("svg output") {
  ShapeSpec s;
  s.count = 40;
  const auto pts = generate_shape(s);
  const BSplineCurve c = make_uniform_curve(6, 3, true, {{0.1, 0.5}, {0.3, 0.1}, {0.7, 0.1}, {0.9, 0.5}, {0.7, 0.9}, {0.3, 0.9}});
  std::ostringstream out;
  write_svg(out, pts, &c, 100);
  const std::string svg = out.str();
  CHECK(count_of(svg, "<circle class=\"pt\"") == 40);
  CHECK(count_of(svg, "<polyline") == 1);
  // Requests below 256 samples are raised; the closed curve repeats its start.
  const auto pl = svg.find("points=\"", svg.find("<polyline"));
  const auto end = svg.find('"', pl + 8);
  const std::string coords = svg.substr(pl + 8, end - pl - 8);
  CHECK(count_of(coords, ",") == 257);
  std::ostringstream none;
  write_svg(none, pts, nullptr);
  CHECK(count_of(none.str(), "<polyline") == 0);
}

TEST_CASE("harness: trace rows and iteration cap") {
  RunConfig c = quick(Method::kPdm, ShapeKind::kCircle, 6);
  c.max_iter = 10;
  c.trace_csv = scratch("pdm.csv").string();
  std::ostringstream log;
  const FitResult r = run_and_trace(c, log);
  const auto lines = lines_of(slurp(c.trace_csv));
  CHECK(lines.size() >= 3);
  CHECK(lines.size() <= 12);
  CHECK(lines[1] == kTraceHeader);
  CHECK(r.trace.records.size() == lines.size() - 2);
  CHECK(log.str().find("method=pdm") != std::string::npos);
}

TEST_CASE("harness: phase percentages") {
  RunConfig c = quick(Method::kSdm, ShapeKind::kStar, 12);
  c.max_iter = 60;
  const RunOutcome out = run_fit(c);
  const auto parts = phase_breakdown(out.fit);
  REQUIRE(parts.size() == 3);
  double sum = 0.0;
  for (const auto& [name, share] : parts) sum += share;
  CHECK(std::fabs(sum - 100.0) < 0.1);
  CHECK(parts[0].first == "matrix_filling");

  const std::string line = summary_line(out.fit);
  double printed = 0.0;
  const std::regex pct("_pct=([0-9.]+)");
  for (auto it = std::sregex_iterator(line.begin(), line.end(), pct); it != std::sregex_iterator(); ++it) {
    printed += std::stod((*it)[1]);
  }
  CHECK(std::fabs(printed - 100.0) <= 0.2);
}

TEST_CASE("harness: L-BFGS summary and coordinates") {
  const RunConfig c = quick(Method::kLbfgs, ShapeKind::kCircle, 6);
  const RunOutcome out = run_fit(c);
  CHECK(out.fit.status == FitStatus::kConverged);
  CHECK(out.fit.final_grad_inf_norm < 1e-8);
  const std::string line = summary_line(out.fit);
  CHECK(line.find("status=converged") != std::string::npos);
  CHECK(line.find("direction_pct=") != std::string::npos);
  CHECK(line.find("linesearch_pct=") != std::string::npos);
  std::smatch m;
  REQUIRE(std::regex_search(line, m, std::regex("grad_inf_norm=([^ ]+)")));
  CHECK(std::stod(m[1]) < 1e-8);
  // The raw curve is the unit curve mapped back through the normalization.
  const NormalizedPoints norm_pts = normalize_points(out.raw_points);
  for (double t : {0.0, 0.3, 0.71}) {
    const Vec2 raw = out.raw_curve.evaluate(t);
    const Vec2 unit = out.fit.curve.evaluate(t);
    CHECK(norm(norm_pts.transform.to_unit(raw) - unit) < 1e-12);
  }
}

TEST_CASE("harness: input files and initial curves") {
  ShapeSpec s;
  s.count = 80;
  s.kind = ShapeKind::kNoisyCircle;
  s.noise_sigma = 0.005;
  std::vector<Vec2> pts = generate_shape(s);
  for (Vec2& p : pts) p = 100.0 * p + Vec2{-20.0, 300.0};  // arbitrary raw frame
  const fs::path in = scratch("raw.txt");
  write_points(in.string(), pts);

  RunConfig c = quick(Method::kTdmlm, ShapeKind::kFromFile, 7);
  c.input = in.string();
  c.curve_out = scratch("fit.curve").string();
  c.svg_out = scratch("fit.svg").string();
  std::ostringstream log;
  const FitResult first = run_and_trace(c, log);
  const BSplineCurve saved = read_curve(c.curve_out);
  CHECK(count_of(slurp(c.svg_out), "<circle class=\"pt\"") == 80);
  // Raw-frame curve lies on the raw data.
  for (Vec2 p : pts) {
    double best = 1e300;
    for (int i = 0; i < 2000; ++i) best = std::min(best, norm(saved.evaluate(i / 2000.0) - p));
    CHECK(best < 3.0);
  }
  // Restarting from the saved curve starts at its error; the saved state is
  // usually already converged, so no iteration may run at all.
  RunConfig again = c;
  again.initial_curve = c.curve_out;
  again.curve_out.clear();
  again.svg_out.clear();
  again.max_iter = 1;
  const RunOutcome second = run_fit(again);
  CHECK(second.fit.final_error <= first.final_error * 1.01);

  RunConfig mismatch = again;
  mismatch.n_ctrl = 9;
  CHECK_THROWS_AS(run_fit(mismatch), std::invalid_argument);
}

TEST_CASE("harness: validation") {
  RunConfig c;
  c.n_ctrl = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.c1 = 0.95;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.method = Method::kSdm;
  c.degree = 1;
  c.n_ctrl = 4;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = RunConfig{};
  c.samples_per_span = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(RunConfig{}.validate());
}

TEST_CASE("scaling sweep") {
  RunConfig base;
  base.shape.count = 120;
  ScalingOptions opts;
  opts.levels = {120};
  opts.window = 5;
  opts.repeats = 1;
  const auto rows = benchmark_scaling(base, opts);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].method == opts.methods[i]);
    CHECK(rows[i].level == 120);
    CHECK(rows[i].error.empty());
    CHECK(rows[i].iterations <= 5);
    CHECK(rows[i].mean_iteration_seconds > 0.0);
  }
  std::ostringstream out;
  write_scaling_csv(out, rows);
  const auto lines = lines_of(out.str());
  CHECK(lines.size() == 6);
  CHECK(lines[1] == "method,level,mean_iter_s,iterations,final_error,status");

  ScalingOptions bad = opts;
  bad.axis = ScalingAxis::kControlPoints;
  bad.levels = {2};
  const auto err = benchmark_scaling(base, bad);
  for (const ScalingRow& r : err) CHECK_FALSE(r.error.empty());
  ScalingOptions empty;
  CHECK_THROWS_AS(benchmark_scaling(base, empty), std::invalid_argument);
}
