#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bsfit/bspline.hpp"

namespace bsfit {

enum class ShapeKind { kCircle, kNoisyCircle, kStar, kFromFile };

std::string_view to_string(ShapeKind kind);
std::optional<ShapeKind> parse_shape(std::string_view name);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::kCircle;
  int count = 100;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::string path;  // kFromFile only
};

inline constexpr Vec2 kShapeCentre{0.5, 0.5};
inline constexpr double kCircleRadius = 0.4;
inline constexpr int kStarTips = 5;
inline constexpr double kStarOuter = 0.45;
inline constexpr double kStarInner = 0.2;

/// Circle: count points at uniform angles on radius kCircleRadius around
/// kShapeCentre. Star: closed 2*kStarTips-gon alternating kStarOuter and
/// kStarInner, sampled uniformly by arc length. Gaussian noise with standard
/// deviation noise_sigma is added per coordinate (std::mt19937_64 seeded with
/// seed); kNoisyCircle is the circle with noise. kFromFile reads a point file
/// and applies the same noise.
///
/// Throws std::invalid_argument for count < 1 or noise_sigma < 0, and
/// InputError when the file cannot be read.
std::vector<Vec2> generate_shape(const ShapeSpec& spec);

/// Vertices of the star polygon, counter-clockwise, first vertex at a tip.
std::vector<Vec2> star_vertices();

/// count points at equal arc-length spacing along a closed polygon, starting
/// at vertex 0.
std::vector<Vec2> sample_closed_polyline(const std::vector<Vec2>& vertices, int count);

}  // namespace bsfit
