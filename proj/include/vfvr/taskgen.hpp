#pragma once

// ISO 9241-9 multidirectional tapping layouts and the experimental design.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vfvr/geometry.hpp"

namespace vfvr {

enum class TechniqueKind { Raycasting, ViewfinderRay, ViewfinderTouch };

inline constexpr std::array<TechniqueKind, 3> kAllTechniques{
    TechniqueKind::Raycasting, TechniqueKind::ViewfinderRay, TechniqueKind::ViewfinderTouch};

constexpr std::string_view technique_name(TechniqueKind k) {
  switch (k) {
    case TechniqueKind::Raycasting: return "Raycasting";
    case TechniqueKind::ViewfinderRay: return "ViewfinderRay";
    case TechniqueKind::ViewfinderTouch: return "ViewfinderTouch";
  }
  return "?";
}

inline TechniqueKind parse_technique(std::string_view s) {
  for (auto k : kAllTechniques)
    if (technique_name(k) == s) return k;
  throw std::invalid_argument("unknown technique '" + std::string(s) + "'");
}

constexpr bool is_viewfinder(TechniqueKind k) { return k != TechniqueKind::Raycasting; }
constexpr std::size_t technique_index(TechniqueKind k) { return static_cast<std::size_t>(k); }

// Nominal design values: 3 deg / 1 deg targets at 5 m, 1 m / 2 m layout diameters.
inline constexpr double kLargeWidth = 0.2619;
inline constexpr double kSmallWidth = 0.0873;
inline constexpr double kShortDistance = 1.0;
inline constexpr double kLongDistance = 2.0;
inline constexpr double kTargetDepth = 5.0;
inline constexpr int kTargetsPerCircle = 11;

struct TargetLayout {
  int n_targets = kTargetsPerCircle;
  double layout_diameter = kShortDistance;
  double target_width = kLargeWidth;
  double depth = kTargetDepth;
  std::vector<Vec3> centers;

  Vec3 center() const { return {0.0, 0.0, depth}; }
  double radius() const { return layout_diameter / 2.0; }
  Plane plane() const { return {center(), -kForward}; }
};

inline void require_odd(int n, const char* who) {
  if (n < 5 || n % 2 == 0)
    throw std::invalid_argument(std::string(who) + ": target count must be odd and >= 5");
}

/// Target k sits at 90° − k·360°/n on the circle, so target 0 is at 12 o'clock
/// and numbering runs clockwise as seen by the participant.
inline TargetLayout layout_targets(int n, double diameter, double width, double depth) {
  require_odd(n, "layout_targets");
  if (!(diameter > 0.0 && width > 0.0 && depth > 0.0))
    throw std::invalid_argument("layout_targets: diameter, width and depth must be positive");
  TargetLayout layout{n, diameter, width, depth, {}};
  layout.centers.reserve(static_cast<std::size_t>(n));
  const double r = diameter / 2.0;
  for (int k = 0; k < n; ++k) {
    const double a = deg_to_rad(90.0 - k * 360.0 / n);
    layout.centers.push_back({r * std::cos(a), r * std::sin(a), depth});
  }
  return layout;
}

/// Alternating visiting order k·(n+1)/2 mod n.
inline std::vector<int> target_order(int n) {
  require_odd(n, "target_order");
  std::vector<int> order(static_cast<std::size_t>(n));
  const int step = (n + 1) / 2;
  for (int k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = (k * step) % n;
  return order;
}

/// Chord between consecutive targets in the visiting order.
inline double task_axis_length(int n, double diameter) {
  return diameter * std::sin(kPi * ((n + 1) / 2) / n);
}

inline double index_of_difficulty(double distance, double width) {
  if (!(distance > 0.0) || !(width > 0.0))
    throw std::domain_error("index_of_difficulty: D and W must be positive");
  return std::log2(distance / width + 1.0);
}

struct Condition {
  TechniqueKind technique = TechniqueKind::Raycasting;
  double target_width = kLargeWidth;
  double layout_diameter = kShortDistance;
  double id_nominal = 0.0;

  bool operator==(const Condition&) const = default;
};

struct Design {
  std::vector<TechniqueKind> techniques{kAllTechniques.begin(), kAllTechniques.end()};
  std::vector<double> sizes{kLargeWidth, kSmallWidth};
  std::vector<double> distances{kShortDistance, kLongDistance};
};

/// Full cross technique × size × distance in that nesting order.
inline std::vector<Condition> make_conditions(const Design& design = {}) {
  std::vector<Condition> out;
  out.reserve(design.techniques.size() * design.sizes.size() * design.distances.size());
  for (auto t : design.techniques)
    for (double w : design.sizes)
      for (double d : design.distances) out.push_back({t, w, d, index_of_difficulty(d, w)});
  return out;
}

}  // namespace vfvr
