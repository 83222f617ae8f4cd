#pragma once

// Fits per-technique motor parameters to per-condition target means
// (movement time, error rate, hand and head path, adjusted visual angle).
//
// Most fields enter the condition means linearly or through a monotone map,
// so they are solved directly:
//   zoom            bisection on the adjusted visual angle
//   fitts_a/b, c    bounded least squares on the lognormal MT mean
//   path terms      nonnegative least squares on the expected path means
// The endpoint noise fields only act through error rates, which need Monte
// Carlo. Those are searched with Nelder-Mead on common random numbers.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "vfvr/errors.hpp"
#include "vfvr/metrics.hpp"
#include "vfvr/motorsim.hpp"
#include "vfvr/nelder_mead.hpp"

namespace vfvr {

struct CalibrationTarget {
  TechniqueKind technique = TechniqueKind::Raycasting;
  double target_width = 0.0;
  double layout_diameter = 0.0;
  double mt = 0.0;                // s
  double error_rate = 0.0;        // percent
  double hand = 0.0;              // m
  double head = 0.0;              // m
  double adj_visual_angle = 0.0;  // deg
};

inline constexpr std::array<const char*, 5> kCalibrationMetrics{"mt", "error_rate", "hand", "head",
                                                                "adj_visual_angle"};

struct CalibrationOptions {
  int trials_per_condition = 20000;
  NelderMeadOptions search;
  bool restart = true;            // one more simplex from the best point if budget remains
  double error_floor_pp = 5.0;    // error residual is (sim − target) / max(target, floor)
  std::uint64_t seed = 0x5EEDCA11B7A7Eull;
  SimulationSettings settings;
};

struct ResidualRow {
  Condition condition;
  std::string metric;
  double target = 0.0;
  double simulated = 0.0;
  double relative = 0.0;    // (simulated − target) / target
  double difference = 0.0;  // simulated − target
};

struct CalibrationResult {
  MotorParams params;
  std::vector<ResidualRow> residuals;
  double objective = 0.0;
  int evaluations = 0;
};

namespace detail {

/// min ‖Xβ − y‖² subject to β_j ≥ lower_j (lower_j = −inf means free), by
/// enumerating which bounds are active. Meant for a handful of columns.
inline Eigen::VectorXd bounded_lsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& lower) {
  const auto k = X.cols();
  Eigen::VectorXd best;
  double best_rss = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    bool ok = true;
    for (Eigen::Index j = 0; j < k; ++j)
      if ((mask >> j & 1u) && !std::isfinite(lower[j])) ok = false;
    if (!ok) continue;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd rhs = y;
    std::vector<Eigen::Index> free;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (mask >> j & 1u) {
        beta[j] = lower[j];
        rhs -= X.col(j) * lower[j];
      } else {
        free.push_back(j);
      }
    }
    if (!free.empty()) {
      Eigen::MatrixXd Xf(X.rows(), static_cast<Eigen::Index>(free.size()));
      for (std::size_t i = 0; i < free.size(); ++i) Xf.col(static_cast<Eigen::Index>(i)) = X.col(free[i]);
      const Eigen::VectorXd sol = Xf.colPivHouseholderQr().solve(rhs);
      for (std::size_t i = 0; i < free.size(); ++i) {
        if (sol[static_cast<Eigen::Index>(i)] < lower[free[i]] - 1e-12) ok = false;
        beta[free[i]] = sol[static_cast<Eigen::Index>(i)];
      }
    }
    if (!ok) continue;
    const double rss = (X * beta - y).squaredNorm();
    if (rss < best_rss) best_rss = rss, best = beta;
  }
  return best;
}

inline double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }
inline double logit(double p) {
  p = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}
inline double safe_log(double v) { return std::log(std::max(v, 1e-6)); }

/// Error rate (percent, outliers excluded) of pre-drawn noise under an endpoint model.
inline double error_rate_crn(const std::vector<TrialNoise>& noise, const EndpointModel& em, double width) {
  const double r = width / 2.0;
  int hits = 0, misses = 0;
  for (const TrialNoise& n : noise) {
    const auto [x, y] = endpoint_offset(n, em);
    const double d = std::hypot(x, y);
    if (d <= r) ++hits;
    else if (d <= kOutlierRadii * r) ++misses;
  }
  const int used = hits + misses;
  return used > 0 ? 100.0 * misses / used : std::numeric_limits<double>::quiet_NaN();
}

struct Cell {
  CalibrationTarget target;
  ConditionGeometry geom;
  std::vector<TrialNoise> noise;
};

}  // namespace detail

/// Adjusted visual angle at the nominal head pose for a viewfinder setup.
inline double viewfinder_visual_angle(const Condition& c, double zoom, double panel_scale,
                                      const SimulationSettings& s = {}) {
  const Pose head{};
  const TargetLayout layout = layout_targets(s.n_targets, c.layout_diameter, c.target_width, s.depth);
  const PanelConfig cfg = configured_panel(c.technique, head, s.capture_h_fov, zoom, panel_scale);
  return adjusted_visual_angle(c.technique, cfg, c.target_width, layout.center(), head);
}

/// Zoom whose adjusted visual angle equals `theta`, clamped to the feasible range.
inline double zoom_for_visual_angle(const Condition& c, double panel_scale, double theta,
                                    const SimulationSettings& s = {}) {
  const TargetLayout layout = layout_targets(s.n_targets, c.layout_diameter, c.target_width, s.depth);
  const auto [lo, hi] = zoom_bounds(layout, s.capture_h_fov);
  if (!(lo < hi)) throw InputError("calibrate: empty zoom range for condition");
  if (viewfinder_visual_angle(c, hi, panel_scale, s) <= theta) return hi;
  if (viewfinder_visual_angle(c, lo, panel_scale, s) >= theta) return lo;
  double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < 80; ++i) {
    const double m = 0.5 * (a + b);
    (viewfinder_visual_angle(c, std::exp(m), panel_scale, s) < theta ? a : b) = m;
  }
  return std::exp(0.5 * (a + b));
}

/// Throws InputError unless every technique has the full size × distance cross.
inline void require_complete_targets(const std::vector<CalibrationTarget>& targets) {
  std::vector<double> sizes, dists;
  auto add = [](std::vector<double>& v, double x) {
    if (std::none_of(v.begin(), v.end(), [&](double y) { return std::abs(x - y) < 1e-9; })) v.push_back(x);
  };
  for (const auto& t : targets) add(sizes, t.target_width), add(dists, t.layout_diameter);
  for (auto k : kAllTechniques)
    for (double w : sizes)
      for (double d : dists) {
        const bool found = std::any_of(targets.begin(), targets.end(), [&](const CalibrationTarget& t) {
          return t.technique == k && std::abs(t.target_width - w) < 1e-9 && std::abs(t.layout_diameter - d) < 1e-9;
        });
        if (!found)
          throw InputError("calibration targets missing condition " + std::string(technique_name(k)) +
                           " W=" + std::to_string(w) + " D=" + std::to_string(d));
      }
  if (sizes.size() * dists.size() < 2) throw InputError("calibration needs at least two conditions per technique");
}

inline double residual_term(const std::string& metric, double sim, double target, double floor_pp) {
  const double denom = metric == "error_rate" ? std::max(target, floor_pp) : target;
  return (sim - target) / denom;
}

/// Mean per-condition measures of a fresh simulation with `n_trials` trials.
inline CalibrationTarget simulated_means(const ConditionGeometry& g, const TechniqueParams& p, std::uint64_t seed,
                                         int n_trials) {
  CalibrationTarget m{g.condition.technique, g.condition.target_width, g.condition.layout_diameter};
  const int per_seq = static_cast<int>(g.order.size());
  const int seqs = std::max(1, (n_trials + per_seq - 1) / per_seq);
  int hits = 0, misses = 0;
  double mt = 0, hand = 0, head = 0, angle = 0;
  for (int s = 0; s < seqs; ++s)
    for (const TrialRecord& r : simulate_sequence(0, g, p, seed, s)) {
      if (r.outcome == Outcome::Outlier) continue;
      (r.outcome == Outcome::Hit ? hits : misses)++;
      mt += r.mt, hand += r.hand_path, head += r.head_path, angle += r.adj_visual_angle;
    }
  const double n = hits + misses;
  if (n == 0) throw NumericError("simulated condition has no usable trials");
  m.mt = mt / n;
  m.error_rate = 100.0 * misses / n;
  m.hand = hand / n;
  m.head = head / n;
  m.adj_visual_angle = angle / n;
  return m;
}

inline CalibrationResult calibrate(const std::vector<CalibrationTarget>& targets, const CalibrationOptions& opt = {},
                                   const MotorParams& init = MotorParams::defaults()) {
  require_complete_targets(targets);
  if (opt.trials_per_condition < 100) throw InputError("calibrate: too few trials per condition");
  for (const auto& t : targets)
    if (!(t.mt > 0 && t.error_rate >= 0 && t.error_rate < 100 && t.hand > 0 && t.head > 0 && t.adj_visual_angle > 0))
      throw InputError("calibration target values out of range");

  CalibrationResult out;
  out.params = init;
  for (auto kind : kAllTechniques) {
    TechniqueParams p = init[kind];
    p.config_zoom.clear();
    std::vector<detail::Cell> cells;
    for (const auto& t : targets) {
      if (t.technique != kind) continue;
      const Condition c{kind, t.target_width, t.layout_diameter, index_of_difficulty(t.layout_diameter, t.target_width)};
      if (is_viewfinder(kind))
        p.set_zoom(c.target_width, c.layout_diameter,
                   zoom_for_visual_angle(c, p.config_panel_scale, t.adj_visual_angle, opt.settings));
      detail::Cell cell{t, make_condition_geometry(c, p, opt.settings), {}};
      std::mt19937_64 rng(stream_seed(opt.seed, -1, c, 0));
      cell.noise.reserve(static_cast<std::size_t>(opt.trials_per_condition));
      for (int i = 0; i < opt.trials_per_condition; ++i) cell.noise.push_back(draw_trial_noise(rng));
      cells.push_back(std::move(cell));
    }
    const auto nc = static_cast<Eigen::Index>(cells.size());
    const double inf = std::numeric_limits<double>::infinity();

    // Movement time: E[MT] = κ·(a + b·ID + c/θ), relative residuals.
    const double kappa = std::exp(0.5 * p.mt_sigma * p.mt_sigma);
    Eigen::MatrixXd X(nc, 3);
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(nc);
    for (Eigen::Index i = 0; i < nc; ++i) {
      const auto& c = cells[static_cast<std::size_t>(i)];
      const double s = kappa / c.target.mt;
      X.row(i) << s, s * c.geom.condition.id_nominal, s / c.geom.adj_visual_angle;
    }
    Eigen::VectorXd beta = detail::bounded_lsq(X, ones, Eigen::Vector3d(-inf, 1e-3, 0.0));
    p.fitts_a = beta[0], p.fitts_b = beta[1], p.angle_c = beta[2];

    // Path lengths: E[path] = base + gain·A + rate·E[MT] + cross·A·E[MT].
    Eigen::MatrixXd H(nc, 4), G(nc, 4);
    for (Eigen::Index i = 0; i < nc; ++i) {
      const auto& c = cells[static_cast<std::size_t>(i)];
      const double m = kappa * mean_movement_time_core(p, c.geom.condition.id_nominal, c.geom.adj_visual_angle);
      const double a = c.geom.control.motor_amplitude;
      H.row(i) << 1.0, a, m, a * m;
      G.row(i) = H.row(i) / c.target.head;
      H.row(i) /= c.target.hand;
    }
    const Eigen::Vector4d zero = Eigen::Vector4d::Zero();
    beta = detail::bounded_lsq(H, ones, zero);
    p.hand_base = beta[0], p.hand_gain = beta[1], p.hand_rate = beta[2], p.hand_cross = beta[3];
    beta = detail::bounded_lsq(G, ones, zero);
    p.head_base = beta[0], p.head_gain = beta[1], p.head_rate = beta[2], p.head_cross = beta[3];

    // Endpoint noise on error rates. For touch the constant panel jitter is
    // carried by touch_sigma_mm; the hover aim term stays at its initial value.
    const bool touch = kind == TechniqueKind::ViewfinderTouch;
    std::vector<double> x0{touch ? detail::safe_log(p.touch_sigma_mm) : detail::safe_log(p.aim_sigma_deg),
                           detail::safe_log(p.amp_noise), detail::safe_log(p.heisenberg_deg),
                           detail::logit(p.heisenberg_prob)};
    auto apply = [&](TechniqueParams& q, const std::vector<double>& x) {
      (touch ? q.touch_sigma_mm : q.aim_sigma_deg) = std::exp(x[0]);
      q.amp_noise = std::exp(x[1]);
      q.heisenberg_deg = std::exp(x[2]);
      q.heisenberg_prob = detail::logistic(x[3]);
    };
    auto objective = [&](const std::vector<double>& x) {
      TechniqueParams q = p;
      apply(q, x);
      double f = 0.0;
      for (const auto& c : cells) {
        const double e = detail::error_rate_crn(c.noise, endpoint_model(kind, q, c.geom.control), c.target.target_width);
        if (std::isnan(e)) return 1e6;  // every endpoint an outlier: far from any target
        const double r = residual_term("error_rate", e, c.target.error_rate, opt.error_floor_pp);
        f += r * r;
      }
      return f;
    };
    NelderMeadResult nm = nelder_mead(objective, x0, opt.search);
    int evals = nm.evals;
    if (opt.restart && evals < opt.search.max_evals) {
      NelderMeadOptions again = opt.search;
      again.max_evals = opt.search.max_evals - evals;
      again.initial_step = opt.search.initial_step / 2;
      NelderMeadResult nm2 = nelder_mead(objective, nm.x, again);
      evals += nm2.evals;
      if (nm2.f <= nm.f) nm = nm2;
    }
    apply(p, nm.x);
    out.evaluations += evals;
    out.params[kind] = p;

    // Residual report from the real simulator.
    for (const auto& c : cells) {
      const CalibrationTarget sim = simulated_means(c.geom, p, opt.seed, opt.trials_per_condition);
      const std::array<std::pair<double, double>, 5> pairs{{{sim.mt, c.target.mt},
                                                           {sim.error_rate, c.target.error_rate},
                                                           {sim.hand, c.target.hand},
                                                           {sim.head, c.target.head},
                                                           {sim.adj_visual_angle, c.target.adj_visual_angle}}};
      for (std::size_t m = 0; m < pairs.size(); ++m) {
        const auto [s, t] = pairs[m];
        const double r = residual_term(kCalibrationMetrics[m], s, t, opt.error_floor_pp);
        if (!std::isfinite(r)) throw NumericError("calibration residual is not finite");
        out.objective += r * r;
        out.residuals.push_back({c.geom.condition, kCalibrationMetrics[m], t, s, (s - t) / t, s - t});
      }
    }
  }
  return out;
}

}  // namespace vfvr
