// bsfit: command-line front end.
//
//   bsfit fit --method lbfgs --shape circle --count 100 --n 6 --trace out.csv
//   bsfit generate --shape noisy_circle --count 150 --sigma 0.01 --seed 7 -o pts.txt
//   bsfit bench-scaling --axis data_points --levels 100,200,500 --n 8
//   bsfit render --points pts.txt --curve fit.curve -o fit.svg
//
// Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 iteration cap.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>

#include "bsfit/harness.hpp"
#include "bsfit/io.hpp"
#include "bsfit/objective.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIterationCap = 3;

const std::map<std::string, bsfit::Method> kMethods{{"lbfgs", bsfit::Method::kLbfgs},
                                                   {"pdm", bsfit::Method::kPdm},
                                                   {"tdmlm", bsfit::Method::kTdmlm},
                                                   {"sdm", bsfit::Method::kSdm}};

const std::map<std::string, bsfit::ShapeKind> kShapes{{"circle", bsfit::ShapeKind::kCircle},
                                                     {"noisy_circle", bsfit::ShapeKind::kNoisyCircle},
                                                     {"star", bsfit::ShapeKind::kStar},
                                                     {"from_file", bsfit::ShapeKind::kFromFile}};

// Enum flags are read as text and converted after parsing.
struct Names {
  std::string shape = "circle";
  std::string method = "lbfgs";
};

void add_shape_flags(CLI::App* app, bsfit::ShapeSpec& s, std::string& kind) {
  app->add_option("--shape", kind, "circle, noisy_circle, star or from_file")
      ->check(CLI::IsMember(kShapes));
  app->add_option("--count", s.count, "number of generated points")->check(CLI::PositiveNumber);
  app->add_option("--sigma", s.noise_sigma, "Gaussian noise standard deviation")->check(CLI::NonNegativeNumber);
  app->add_option("--seed", s.seed, "noise seed");
  app->add_option("--shape-file", s.path, "point file for --shape from_file");
}

void add_run_flags(CLI::App* app, bsfit::RunConfig& c, Names& names) {
  app->add_option("--method", names.method, "lbfgs, pdm, tdmlm or sdm")->check(CLI::IsMember(kMethods));
  app->add_option("--n", c.n_ctrl, "control points");
  app->add_option("--degree", c.degree, "spline degree");
  app->add_option("--closed", c.closed, "closed curve (true/false)");
  app->add_option("--alpha", c.alpha, "weight of the first-derivative fairing term");
  app->add_option("--beta", c.beta, "weight of the second-derivative fairing term");
  app->add_option("--m", c.m, "L-BFGS history size");
  app->add_option("--c1", c.c1, "sufficient decrease constant");
  app->add_option("--c2", c.c2, "curvature constant");
  app->add_option("--grad-tol", c.grad_tol, "stop when the gradient infinity norm drops below");
  app->add_option("--max-iter", c.max_iter, "iteration cap");
  app->add_option("--restart-tol", c.restart_tol, "foot-point correction tolerance");
  app->add_option("--samples-per-span", c.samples_per_span, "dense seeding samples per knot span");
  app->add_option("--input", c.input, "point file (overrides --shape)");
  app->add_option("--initial-curve", c.initial_curve, "curve file with the initial control points");
  add_shape_flags(app, c.shape, names.shape);
}

void apply(const Names& names, bsfit::RunConfig& c) {
  c.method = kMethods.at(names.method);
  c.shape.kind = kShapes.at(names.shape);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-spline curve fitting"};
  app.require_subcommand(1);

  bsfit::RunConfig fit_cfg;
  auto* fit = app.add_subcommand("fit", "fit one method and write the trace");
  Names fit_names;
  add_run_flags(fit, fit_cfg, fit_names);
  fit->add_option("--trace", fit_cfg.trace_csv, "trace CSV path ('-' for stdout)");
  fit->add_option("--curve-out", fit_cfg.curve_out, "fitted curve file");
  fit->add_option("--svg", fit_cfg.svg_out, "SVG rendering of data and fit");

  bsfit::ShapeSpec gen_spec;
  std::string gen_out = "-";
  auto* gen = app.add_subcommand("generate", "write a generated point file");
  std::string gen_shape = "circle";
  add_shape_flags(gen, gen_spec, gen_shape);
  gen->add_option("-o,--output", gen_out, "output path ('-' for stdout)");

  bsfit::RunConfig bench_cfg;
  bsfit::ScalingOptions bench_opts;
  std::string axis = "data_points";
  std::string bench_out = "-";
  std::vector<std::string> bench_methods;
  auto* bench = app.add_subcommand("bench-scaling", "per-iteration time sweeps");
  Names bench_names;
  add_run_flags(bench, bench_cfg, bench_names);
  bench->add_option("--axis", axis, "data_points or control_points")
      ->check(CLI::IsMember({"data_points", "control_points"}));
  bench->add_option("--levels", bench_opts.levels, "comma separated levels")->delimiter(',')->required();
  bench->add_option("--methods", bench_methods, "methods to run (default all)")
      ->delimiter(',')
      ->check(CLI::IsMember({"lbfgs", "pdm", "tdmlm", "sdm"}));
  bench->add_option("--window", bench_opts.window, "iterations entering the mean");
  bench->add_option("--repeats", bench_opts.repeats, "repeats per cell (medians of paired ratios kept)");
  bench->add_option("-o,--output", bench_out, "CSV path ('-' for stdout)");

  std::string render_points;
  std::string render_curve;
  std::string render_out = "-";
  auto* render = app.add_subcommand("render", "SVG of a point file and an optional curve file");
  render->add_option("--points", render_points, "point file")->required();
  render->add_option("--curve", render_curve, "curve file");
  render->add_option("-o,--output", render_out, "SVG path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto out_stream = [](const std::string& path, std::ofstream& file) -> std::ostream& {
    if (path == "-") return std::cout;
    file.open(path);
    if (!file) throw bsfit::InputError("cannot write " + path);
    return file;
  };

  try {
    if (*fit) {
      apply(fit_names, fit_cfg);
      const bsfit::FitResult r = bsfit::run_and_trace(fit_cfg, std::cerr);
      switch (r.status) {
        case bsfit::FitStatus::kConverged: return kExitOk;
        case bsfit::FitStatus::kIterationCap: return kExitIterationCap;
        default: return kExitNumerical;
      }
    }
    if (*gen) {
      gen_spec.kind = kShapes.at(gen_shape);
      std::ofstream file;
      bsfit::write_points(out_stream(gen_out, file), bsfit::generate_shape(gen_spec));
      return kExitOk;
    }
    if (*bench) {
      apply(bench_names, bench_cfg);
      bench_opts.axis = axis == "data_points" ? bsfit::ScalingAxis::kDataPoints
                                              : bsfit::ScalingAxis::kControlPoints;
      if (!bench_methods.empty()) {
        bench_opts.methods.clear();
        for (const auto& m : bench_methods) bench_opts.methods.push_back(kMethods.at(m));
      }
      const auto rows = bsfit::benchmark_scaling(bench_cfg, bench_opts);
      std::ofstream file;
      bsfit::write_scaling_csv(out_stream(bench_out, file), rows);
      return kExitOk;
    }
    if (*render) {
      const auto raw = bsfit::read_points(render_points);
      const bsfit::NormalizedPoints norm = bsfit::normalize_points(raw);
      std::optional<bsfit::BSplineCurve> curve;
      if (!render_curve.empty()) {
        const bsfit::BSplineCurve c = bsfit::read_curve(render_curve);
        std::vector<bsfit::Vec2> ctrl(c.control_points().begin(), c.control_points().end());
        for (auto& p : ctrl) p = norm.transform.to_unit(p);
        curve = c.with_control_points(std::move(ctrl));
      }
      std::ofstream file;
      bsfit::write_svg(out_stream(render_out, file), norm.points, curve ? &*curve : nullptr);
      return kExitOk;
    }
  } catch (const bsfit::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
