#pragma once

// Fitts' law / ISO 9241-9 measurement pipeline.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "vfvr/geometry.hpp"
#include "vfvr/trial.hpp"

namespace vfvr {

/// Converts SD_x to an effective width covering 96% of endpoints (z = ±2.066).
inline constexpr double kEffectiveWidthFactor = 4.133;
inline constexpr double kOutlierRadii = 3.0;

/// Hit inside the radius (boundary inclusive), outlier strictly beyond 3 radii.
inline Outcome classify_trial(const Vec3& selection, const Vec3& target_center, double width) {
  const double d = distance(selection, target_center);
  const double r = width / 2.0;
  if (d <= r) return Outcome::Hit;
  if (d > kOutlierRadii * r) return Outcome::Outlier;
  return Outcome::Miss;
}

struct AxisProjection {
  double dx = 0.0;         // signed overshoot along the task axis
  double effective = 0.0;  // movement distance for D_e
};

/// Projects the selection onto the from→target axis using the three pairwise
/// distances, so only in-plane lengths are needed.
inline AxisProjection project_dx(const Vec3& from, const Vec3& target, const Vec3& select) {
  const double a = distance(target, from);
  if (!(a > 0.0)) throw std::domain_error("project_dx: from point coincides with target");
  const double b = distance(select, target);
  const double c = distance(select, from);
  const double dx = (c * c - b * b - a * a) / (2.0 * a);
  return {dx, a + dx};
}

struct SequenceSummary {
  double mt_mean = 0.0;
  double error_rate = 0.0;  // percent
  double d_e = 0.0;
  double sd_x = 0.0;
  double w_e = 0.0;
  double id_e = 0.0;
  double throughput = 0.0;
  double hand_movement = 0.0;
  double head_movement = 0.0;
  double actual_depth = 0.0;
  double adj_visual_angle = 0.0;
  int n_used = 0;
  int n_outliers = 0;
  // False when every selection lands on the same along-axis offset (W_e = 0).
  bool valid = true;
};

inline double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

inline SequenceSummary sequence_summary(std::span<const TrialRecord> trials) {
  SequenceSummary s;
  std::vector<double> dxs;
  dxs.reserve(trials.size());
  int hits = 0, misses = 0;
  double mt = 0.0, de = 0.0, hand = 0.0, head = 0.0, depth = 0.0, angle = 0.0;
  for (const TrialRecord& t : trials) {
    const Outcome o = classify_trial(t.selection_point, t.target_center, t.condition.target_width);
    if (o == Outcome::Outlier) {
      ++s.n_outliers;
      continue;
    }
    (o == Outcome::Hit ? hits : misses)++;
    const AxisProjection p = project_dx(t.from_point, t.target_center, t.selection_point);
    dxs.push_back(p.dx);
    de += p.effective;
    mt += t.mt;
    hand += t.hand_path;
    head += t.head_path;
    depth += t.actual_depth;
    angle += t.adj_visual_angle;
  }
  s.n_used = hits + misses;
  if (s.n_used < 3) throw std::invalid_argument("sequence_summary: fewer than 3 usable trials");
  const double n = s.n_used;
  s.error_rate = 100.0 * misses / n;
  s.mt_mean = mt / n;
  s.d_e = de / n;
  s.hand_movement = hand / n;
  s.head_movement = head / n;
  s.actual_depth = depth / n;
  s.adj_visual_angle = angle / n;
  s.sd_x = sample_sd(dxs);
  s.w_e = kEffectiveWidthFactor * s.sd_x;
  if (s.w_e > 0.0) {
    s.id_e = std::log2(s.d_e / s.w_e + 1.0);
  } else {
    s.id_e = std::numeric_limits<double>::infinity();
    s.valid = false;
  }
  s.throughput = s.id_e / s.mt_mean;
  return s;
}

struct FittsFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares MT = a + b·ID.
inline FittsFit fitts_regression(std::span<const std::pair<double, double>> points) {
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (points.size() < 2 || !(sxx > 0.0))
    throw std::invalid_argument("fitts_regression: needs at least two distinct ID values");
  FittsFit fit;
  fit.b = sxy / sxx;
  fit.a = my - fit.b * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
  return fit;
}

// NASA-TLX

inline constexpr std::array<const char*, 6> kTlxScales{"mental",      "physical", "temporal",
                                                       "performance", "effort",   "frustration"};

struct TlxResponse {
  std::array<double, 6> ratings{};  // 0..100
  std::array<int, 6> weights{};     // tallies from the 15 pairwise comparisons

  void validate() const {
    int sum = 0;
    for (int w : weights) {
      if (w < 0 || w > 5) throw std::invalid_argument("TLX weight outside [0, 5]");
      sum += w;
    }
    if (sum != 15) throw std::invalid_argument("TLX weights must sum to 15");
    for (double r : ratings)
      if (!(r >= 0.0 && r <= 100.0)) throw std::invalid_argument("TLX rating outside [0, 100]");
  }
};

inline double tlx_weighted(const TlxResponse& resp) {
  resp.validate();
  double acc = 0.0;
  for (std::size_t i = 0; i < 6; ++i) acc += resp.weights[i] * resp.ratings[i];
  return acc / 15.0;
}

inline double tlx_raw(const TlxResponse& resp) {
  return std::accumulate(resp.ratings.begin(), resp.ratings.end(), 0.0) / 6.0;
}

}  // namespace vfvr
