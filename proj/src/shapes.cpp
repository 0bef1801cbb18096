#include "bsfit/shapes.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "bsfit/io.hpp"

namespace bsfit {

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kCircle: return "circle";
    case ShapeKind::kNoisyCircle: return "noisy_circle";
    case ShapeKind::kStar: return "star";
    case ShapeKind::kFromFile: return "from_file";
  }
  return "unknown";
}

std::optional<ShapeKind> parse_shape(std::string_view name) {
  for (ShapeKind k : {ShapeKind::kCircle, ShapeKind::kNoisyCircle, ShapeKind::kStar, ShapeKind::kFromFile}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<Vec2> star_vertices() {
  std::vector<Vec2> v;
  for (int i = 0; i < 2 * kStarTips; ++i) {
    const double r = i % 2 == 0 ? kStarOuter : kStarInner;
    const double a = std::numbers::pi / 2 + std::numbers::pi * i / kStarTips;
    v.push_back(kShapeCentre + r * Vec2{std::cos(a), std::sin(a)});
  }
  return v;
}

std::vector<Vec2> sample_closed_polyline(const std::vector<Vec2>& vertices, int count) {
  if (vertices.size() < 2) throw std::invalid_argument("polyline needs at least two vertices");
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const std::size_t m = vertices.size();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + norm(vertices[(i + 1) % m] - vertices[i]);
  const double total = cum[m];
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(count));
  std::size_t seg = 0;
  for (int k = 0; k < count; ++k) {
    const double s = total * k / count;
    while (seg + 1 < m && cum[seg + 1] <= s) ++seg;
    const double len = cum[seg + 1] - cum[seg];
    const double u = len > 0.0 ? (s - cum[seg]) / len : 0.0;
    const Vec2 a = vertices[seg];
    const Vec2 b = vertices[(seg + 1) % m];
    out.push_back(a + u * (b - a));
  }
  return out;
}

std::vector<Vec2> generate_shape(const ShapeSpec& spec) {
  if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be >= 0");
  std::vector<Vec2> pts;
  switch (spec.kind) {
    case ShapeKind::kCircle:
    case ShapeKind::kNoisyCircle:
      if (spec.count < 1) throw std::invalid_argument("count must be >= 1");
      for (int k = 0; k < spec.count; ++k) {
        const double a = 2.0 * std::numbers::pi * k / spec.count;
        pts.push_back(kShapeCentre + kCircleRadius * Vec2{std::cos(a), std::sin(a)});
      }
      break;
    case ShapeKind::kStar:
      pts = sample_closed_polyline(star_vertices(), spec.count);
      break;
    case ShapeKind::kFromFile:
      pts = read_points(spec.path);
      break;
  }
  if (spec.noise_sigma > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sigma);
    for (Vec2& p : pts) {
      p.x += noise(rng);
      p.y += noise(rng);
    }
  }
  return pts;
}

}  // namespace bsfit
