#pragma once

// Stochastic human motor model that synthesizes selection trials.
//
// Each trial aims at the current target center. The endpoint scatters with an
// isotropic Gaussian on the target plane plus, for pinch-triggered techniques,
// an occasional trigger kick (Heisenberg effect, or a fingertip tracking glitch
// for touch) with exponential magnitude.
// Movement time is lognormal around a + b·ID + c/θ, θ being the adjusted
// target visual angle. Hand and head path lengths grow with motor amplitude
// with movement time and with their product.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "vfvr/geometry.hpp"
#include "vfvr/metrics.hpp"
#include "vfvr/taskgen.hpp"
#include "vfvr/technique.hpp"
#include "vfvr/trial.hpp"

namespace vfvr {

inline constexpr double kArmLever = 0.6;            // m, angular amplitude -> hand arc
inline constexpr double kMinMovementTime = 0.15;    // s
inline constexpr Vec3 kRayHandOffset{0.15, -0.35, 0.20};  // dominant hand, head frame
inline constexpr double kTouchRestDistance = 0.10;  // m, fingertip hover before a touch
inline constexpr double kHeadJitter = 0.01;         // m per axis while the view is frozen

struct PanelPlacement {
  double distance = 0.0;
  double depression_deg = 0.0;
};

// Where participants put the panel after configuring it, per technique.
inline constexpr PanelPlacement kRayPanelPlacement{0.47, 10.0};
inline constexpr PanelPlacement kTouchPanelPlacement{0.40, 17.2};

inline PanelPlacement panel_placement(TechniqueKind k) {
  return k == TechniqueKind::ViewfinderTouch ? kTouchPanelPlacement : kRayPanelPlacement;
}

struct ZoomSetting {
  double target_width = 0.0;
  double layout_diameter = 0.0;
  double zoom = 1.0;
};

struct TechniqueParams {
  // Movement time
  double fitts_a = 0.3;   // s
  double fitts_b = 0.3;   // s/bit
  double angle_c = 1.0;   // s·deg, weight of 1/θ_adj
  double mt_sigma = 0.3;  // lognormal dispersion
  // Endpoint scatter
  double aim_sigma_deg = 0.2;
  double amp_noise = 0.01;  // SD per unit motor amplitude (deg/deg or m/m)
  double heisenberg_deg = 0.6;
  double heisenberg_prob = 0.5;
  double touch_sigma_mm = 0.0;
  // Behavior: path = base + gain·A + rate·MT + cross·A·MT, A = motor amplitude
  double hand_base = 0.0;   // m
  double hand_gain = 5.0;   // m per m
  double hand_rate = 0.3;   // m per s
  double hand_cross = 0.0;  // 1/s
  double head_base = 0.0;
  double head_gain = 0.0;
  double head_rate = 0.15;
  double head_cross = 0.0;
  double path_sigma = 0.25;
  // Panel setup chosen by participants (viewfinder kinds)
  double config_panel_scale = 1.25;
  std::vector<ZoomSetting> config_zoom;

  /// NaN when no setting exists for the condition.
  double zoom_for(double width, double diameter) const {
    for (const auto& z : config_zoom)
      if (std::abs(z.target_width - width) < 1e-9 && std::abs(z.layout_diameter - diameter) < 1e-9)
        return z.zoom;
    return std::numeric_limits<double>::quiet_NaN();
  }

  void set_zoom(double width, double diameter, double zoom) {
    for (auto& z : config_zoom)
      if (std::abs(z.target_width - width) < 1e-9 && std::abs(z.layout_diameter - diameter) < 1e-9) {
        z.zoom = zoom;
        return;
      }
    config_zoom.push_back({width, diameter, zoom});
  }

  void validate() const {
    for (double s : {mt_sigma, aim_sigma_deg, amp_noise, heisenberg_deg, touch_sigma_mm, path_sigma})
      if (!(s >= 0.0)) throw std::invalid_argument("motor params: sigmas must be >= 0");
    for (double g : {hand_base, hand_gain, hand_rate, hand_cross, head_base, head_gain, head_rate, head_cross})
      if (!(g >= 0.0)) throw std::invalid_argument("motor params: path coefficients must be >= 0");
    if (!(fitts_b > 0.0)) throw std::invalid_argument("motor params: fitts_b must be > 0");
    if (!(heisenberg_prob >= 0.0 && heisenberg_prob <= 1.0))
      throw std::invalid_argument("motor params: heisenberg_prob outside [0, 1]");
    if (!(config_panel_scale >= Panel::kMinScale && config_panel_scale <= Panel::kMaxScale))
      throw std::invalid_argument("motor params: panel scale outside [0.1, 10]");
  }
};

struct MotorParams {
  std::array<TechniqueParams, 3> technique;

  TechniqueParams& operator[](TechniqueKind k) { return technique[technique_index(k)]; }
  const TechniqueParams& operator[](TechniqueKind k) const { return technique[technique_index(k)]; }

  /// Uncalibrated starting point; zooms fall back to 80% of the feasible maximum.
  static MotorParams defaults() {
    MotorParams m;
    auto& rc = m[TechniqueKind::Raycasting];
    rc.fitts_a = -0.08, rc.fitts_b = 0.54, rc.angle_c = 0.93;
    rc.aim_sigma_deg = 0.17, rc.amp_noise = 0.008, rc.heisenberg_deg = 0.67, rc.heisenberg_prob = 0.5;
    rc.hand_gain = 5.5, rc.hand_rate = 0.29, rc.head_rate = 0.15;
    auto& vr = m[TechniqueKind::ViewfinderRay];
    vr.fitts_a = 0.30, vr.fitts_b = 0.29, vr.angle_c = 1.09;
    vr.aim_sigma_deg = 0.5, vr.amp_noise = 0.01, vr.heisenberg_deg = 1.0, vr.heisenberg_prob = 0.4;
    vr.hand_gain = 5.0, vr.hand_rate = 0.5, vr.head_rate = 0.2;
    auto& vt = m[TechniqueKind::ViewfinderTouch];
    vt.fitts_a = 0.43, vt.fitts_b = 0.01, vt.angle_c = 2.88;
    vt.aim_sigma_deg = 0.5, vt.amp_noise = 0.01, vt.heisenberg_deg = 3.0, vt.heisenberg_prob = 0.05;
    vt.touch_sigma_mm = 3.0;
    vt.hand_gain = 15.0, vt.hand_rate = 0.0, vt.head_base = 0.0, vt.head_gain = 0.0, vt.head_rate = 0.35;
    return m;
  }
};

// ---------------------------------------------------------------------------
// Per-condition geometry

struct SimulationSettings {
  int n_targets = kTargetsPerCircle;
  double depth = kTargetDepth;
  double capture_h_fov = kDefaultCaptureHFov;
};

/// Hand, panel and amplitude quantities that turn motor noise into endpoint
/// scatter on the target plane.
struct ControlGeometry {
  Vec3 hand;                     // ray anchor (ray kinds)
  double motor_amplitude = 0.0;  // m: hand arc (ray kinds) or fingertip reach on the panel
  double noise_amplitude = 0.0;  // deg (ray kinds) or m on the panel (touch)
  double control_distance = 0.0; // m: head-to-targets (raycasting), hand-to-panel, or fingertip hover
  double magnification = 1.0;    // target-plane m per panel m
};

inline double angle_between_deg(const Vec3& a, const Vec3& b) {
  const double c = dot(a.normalized(), b.normalized());
  return rad_to_deg(std::acos(std::clamp(c, -1.0, 1.0)));
}

inline ControlGeometry control_geometry(TechniqueKind kind, const PanelConfig& cfg,
                                        const TargetLayout& layout, const Pose& head) {
  ControlGeometry g;
  g.hand = head.position + head.orientation.rotate(kRayHandOffset);
  const auto order = target_order(layout.n_targets);
  const Vec3& t0 = layout.centers[static_cast<std::size_t>(order[0])];
  const Vec3& t1 = layout.centers[static_cast<std::size_t>(order[1])];
  if (kind == TechniqueKind::Raycasting) {
    g.noise_amplitude = angle_between_deg(t0 - g.hand, t1 - g.hand);
    g.motor_amplitude = deg_to_rad(g.noise_amplitude) * kArmLever;
    g.control_distance = distance(head.position, layout.center());
    return g;
  }
  require_configured(kind, cfg);
  const auto uv0 = proxy_uv(cfg, t0);
  const auto uv1 = proxy_uv(cfg, t1);
  if (!uv0 || !uv1) throw std::domain_error("target layout outside the captured frustum");
  const Vec3 p0 = cfg.panel.point_at(uv0->u, uv0->v);
  const Vec3 p1 = cfg.panel.point_at(uv1->u, uv1->v);
  const Plane plane = layout.plane();
  const auto left = ray_plane_intersect(uv_to_world_ray(cfg.panel.view, 0.0, 0.5), plane);
  const auto right = ray_plane_intersect(uv_to_world_ray(cfg.panel.view, 1.0, 0.5), plane);
  if (!left || !right) throw std::domain_error("captured view does not reach the target plane");
  g.magnification = distance(*left, *right) / cfg.panel.scaled_width();
  if (kind == TechniqueKind::ViewfinderRay) {
    g.noise_amplitude = angle_between_deg(p0 - g.hand, p1 - g.hand);
    g.motor_amplitude = deg_to_rad(g.noise_amplitude) * kArmLever;
    g.control_distance = distance(g.hand, cfg.panel.pose.position);
  } else {
    g.noise_amplitude = distance(p0, p1);
    g.motor_amplitude = g.noise_amplitude;
    g.control_distance = kTouchRestDistance;
  }
  return g;
}

struct EndpointModel {
  double sigma_plane = 0.0;     // per-axis Gaussian SD on the target plane
  double kick_scale = 0.0;      // plane m per tan(kick angle)
  double kick_mean_deg = 0.0;
  double kick_prob = 0.0;
};

inline EndpointModel endpoint_model(TechniqueKind kind, const TechniqueParams& p,
                                    const ControlGeometry& g) {
  EndpointModel m;
  m.kick_scale = g.control_distance * g.magnification;
  if (kind == TechniqueKind::ViewfinderTouch) {
    const double hover = g.control_distance * std::tan(deg_to_rad(p.aim_sigma_deg));
    const double panel = std::sqrt(hover * hover + std::pow(p.touch_sigma_mm / 1000.0, 2) +
                                   std::pow(p.amp_noise * g.noise_amplitude, 2));
    m.sigma_plane = panel * g.magnification;
  } else {
    const double sigma_deg = std::hypot(p.aim_sigma_deg, p.amp_noise * g.noise_amplitude);
    m.sigma_plane = m.kick_scale * std::tan(deg_to_rad(sigma_deg));
  }
  m.kick_mean_deg = p.heisenberg_deg;
  m.kick_prob = p.heisenberg_deg > 0.0 ? p.heisenberg_prob : 0.0;
  return m;
}

/// Per-axis Gaussian endpoint SD on the target plane.
inline double effective_endpoint_sigma(TechniqueKind kind, const TechniqueParams& params,
                                       const PanelConfig& cfg, const TargetLayout& layout,
                                       const Pose& head) {
  return endpoint_model(kind, params, control_geometry(kind, cfg, layout, head)).sigma_plane;
}

/// Everything about one condition that is fixed across its trials.
struct ConditionGeometry {
  Condition condition;
  TargetLayout layout;
  std::vector<int> order;
  Pose head;
  PanelConfig cfg;
  ControlGeometry control;
  double proxy_width = 0.0;       // m on the panel (viewfinder kinds)
  double adj_visual_angle = 0.0;  // deg at the nominal head pose
};

/// Configured panel the way participants set it up for a condition.
inline PanelConfig configured_panel(TechniqueKind kind, const Pose& head, double h_fov, double zoom,
                                    double panel_scale) {
  const PanelPlacement place = panel_placement(kind);
  PanelConfig cfg = default_panel(head, h_fov);
  cfg = configure(cfg, cmd::Grab{facing_panel_pose(head, place.distance, place.depression_deg)}, head);
  cfg = configure(cfg, cmd::SetViewZoom{zoom}, head);
  return configure(cfg, cmd::SetPanelScale{panel_scale}, head);
}

/// Zoom range allowed for a condition: [0.1, feasible maximum with 5% margin].
inline std::pair<double, double> zoom_bounds(const TargetLayout& layout, double h_fov) {
  const Pose head{};
  CapturedView view;
  view.origin = head.position;
  view.orientation = head.orientation;
  view.h_fov = h_fov;
  view.v_fov = vfov_for_aspect(h_fov);
  return {0.1, std::min(20.0, max_feasible_zoom(view, layout))};
}

inline ConditionGeometry make_condition_geometry(const Condition& cond, const TechniqueParams& params,
                                                 const SimulationSettings& settings = {}) {
  ConditionGeometry g;
  g.condition = cond;
  g.layout = layout_targets(settings.n_targets, cond.layout_diameter, cond.target_width, settings.depth);
  g.order = target_order(settings.n_targets);
  g.head = Pose{};
  g.cfg = default_panel(g.head, settings.capture_h_fov);
  if (is_viewfinder(cond.technique)) {
    const auto [lo, hi] = zoom_bounds(g.layout, settings.capture_h_fov);
    double zoom = params.zoom_for(cond.target_width, cond.layout_diameter);
    if (std::isnan(zoom)) zoom = 0.8 * hi;
    if (!(zoom >= lo && zoom <= hi * (1.0 + 1e-9)))
      throw std::invalid_argument("config_zoom outside the frustum-feasible range");
    g.cfg = configured_panel(cond.technique, g.head, settings.capture_h_fov, zoom,
                             params.config_panel_scale);
    g.proxy_width = proxy_width(g.cfg, cond.target_width, g.layout.center());
  }
  g.control = control_geometry(cond.technique, g.cfg, g.layout, g.head);
  g.adj_visual_angle =
      adjusted_visual_angle(cond.technique, g.cfg, cond.target_width, g.layout.center(), g.head);
  return g;
}

// ---------------------------------------------------------------------------
// Random streams

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of the private stream of one (participant, condition, sequence).
inline std::uint64_t stream_seed(std::uint64_t master, int participant, const Condition& c, int sequence) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t v :
       {static_cast<std::uint64_t>(participant), static_cast<std::uint64_t>(technique_index(c.technique)),
        std::bit_cast<std::uint64_t>(c.target_width), std::bit_cast<std::uint64_t>(c.layout_diameter),
        static_cast<std::uint64_t>(sequence)})
    h = splitmix64(h ^ v);
  return h;
}

/// Standard variates consumed by one trial.
struct TrialNoise {
  double z_x = 0.0, z_y = 0.0;                      // endpoint Gaussian
  double kick_u = 1.0, kick_e = 0.0, kick_phi = 0.0;  // kick occurrence, Exp(1), angle
  double z_mt = 0.0, z_hand = 0.0, z_head = 0.0;
  Vec3 z_headpos;
};

template <class Rng>
TrialNoise draw_trial_noise(Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  TrialNoise n;
  n.z_x = normal(rng);
  n.z_y = normal(rng);
  n.kick_u = unit(rng);
  n.kick_e = -std::log1p(-unit(rng));
  n.kick_phi = 2.0 * kPi * unit(rng);
  n.z_mt = normal(rng);
  n.z_hand = normal(rng);
  n.z_head = normal(rng);
  n.z_headpos = {normal(rng), normal(rng), normal(rng)};
  return n;
}

struct TrialSample {
  double offset_x = 0.0, offset_y = 0.0;  // endpoint minus aim, target-plane frame
  double mt = 0.0;
  double hand_path = 0.0;
  double head_path = 0.0;
  Vec3 head_position;
};

inline double mean_movement_time_core(const TechniqueParams& p, double id, double visual_angle_deg) {
  return p.fitts_a + p.fitts_b * id + p.angle_c / visual_angle_deg;
}

/// Endpoint minus aim point on the target plane.
inline std::pair<double, double> endpoint_offset(const TrialNoise& n, const EndpointModel& em) {
  double x = em.sigma_plane * n.z_x;
  double y = em.sigma_plane * n.z_y;
  if (n.kick_u < em.kick_prob) {
    const double kick = std::min(n.kick_e * em.kick_mean_deg, 80.0);
    const double len = em.kick_scale * std::tan(deg_to_rad(kick));
    x += len * std::cos(n.kick_phi);
    y += len * std::sin(n.kick_phi);
  }
  return {x, y};
}

inline TrialSample realize_trial(const TrialNoise& n, const EndpointModel& em, double mt_core,
                                 double motor_amplitude, const TechniqueParams& p, const Pose& head) {
  TrialSample s;
  std::tie(s.offset_x, s.offset_y) = endpoint_offset(n, em);
  s.mt = std::max(kMinMovementTime, mt_core * std::exp(p.mt_sigma * n.z_mt));
  const double ps2 = 0.5 * p.path_sigma * p.path_sigma;
  const double a = motor_amplitude;
  s.hand_path = (p.hand_base + p.hand_gain * a + (p.hand_rate + p.hand_cross * a) * s.mt) *
                std::exp(p.path_sigma * n.z_hand - ps2);
  s.head_path = (p.head_base + p.head_gain * a + (p.head_rate + p.head_cross * a) * s.mt) *
                std::exp(p.path_sigma * n.z_head - ps2);
  s.head_position = head.position + n.z_headpos * kHeadJitter;
  return s;
}

/// One circle of selections. The first trial starts from the cyclic
/// predecessor target so every task axis has the chord length.
inline std::vector<TrialRecord> simulate_sequence(int participant, const ConditionGeometry& g,
                                                  const TechniqueParams& params, std::uint64_t master_seed,
                                                  int sequence_idx) {
  params.validate();
  const TechniqueKind kind = g.condition.technique;
  const EndpointModel em = endpoint_model(kind, params, g.control);
  const double mt_core = mean_movement_time_core(params, g.condition.id_nominal, g.adj_visual_angle);
  std::mt19937_64 rng(stream_seed(master_seed, participant, g.condition, sequence_idx));

  const std::size_t n = g.order.size();
  const Vec3 ex = kRight, ey = kUp;  // target-plane axes
  std::vector<TrialRecord> out;
  out.reserve(n);
  Vec3 from = g.layout.centers[static_cast<std::size_t>(g.order[n - 1])];
  for (std::size_t k = 0; k < n; ++k) {
    const TrialNoise noise = draw_trial_noise(rng);
    const TrialSample s = realize_trial(noise, em, mt_core, g.control.motor_amplitude, params, g.head);
    TrialRecord r;
    r.participant = participant;
    r.condition = g.condition;
    r.depth = g.layout.depth;
    r.sequence_idx = sequence_idx;
    r.trial_idx = static_cast<int>(k);
    r.target_index = g.order[k];
    r.from_point = from;
    r.target_center = g.layout.centers[static_cast<std::size_t>(r.target_index)];
    r.selection_point = r.target_center + ex * s.offset_x + ey * s.offset_y;
    r.mt = s.mt;
    r.hand_path = s.hand_path;
    r.head_path = s.head_path;
    r.outcome = classify_trial(r.selection_point, r.target_center, g.condition.target_width);
    const Pose head_now{s.head_position, g.head.orientation};
    r.actual_depth = actual_target_depth(kind, g.cfg, head_now, g.layout);
    r.adj_visual_angle = kind == TechniqueKind::Raycasting
                             ? visual_angle(g.condition.target_width, distance(head_now.position, r.target_center))
                             : visual_angle(g.proxy_width, r.actual_depth);
    out.push_back(r);
    from = r.selection_point;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whole experiment

struct SimulationPlan {
  int participants = 20;
  Design design;
  int sequences = 3;
  SimulationSettings settings;
};

/// Trials in (participant, condition, sequence, trial) order. The result does
/// not depend on `threads`.
inline std::vector<TrialRecord> simulate_experiment(const SimulationPlan& plan, const MotorParams& params,
                                                    std::uint64_t master_seed, unsigned threads = 1) {
  if (plan.participants < 1 || plan.sequences < 1)
    throw std::invalid_argument("simulation plan needs at least one participant and sequence");
  const auto conditions = make_conditions(plan.design);
  std::vector<ConditionGeometry> geoms;
  geoms.reserve(conditions.size());
  for (const auto& c : conditions)
    geoms.push_back(make_condition_geometry(c, params[c.technique], plan.settings));

  struct Job {
    int participant;
    std::size_t cond;
    int sequence;
  };
  std::vector<Job> jobs;
  for (int p = 0; p < plan.participants; ++p)
    for (std::size_t c = 0; c < conditions.size(); ++c)
      for (int s = 0; s < plan.sequences; ++s) jobs.push_back({p + 1, c, s});

  std::vector<std::vector<TrialRecord>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      const auto& g = geoms[job.cond];
      results[j] = simulate_sequence(job.participant, g, params[g.condition.technique], master_seed, job.sequence);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<TrialRecord> out;
  out.reserve(jobs.size() * static_cast<std::size_t>(plan.settings.n_targets));
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  return out;
}

}  // namespace vfvr
