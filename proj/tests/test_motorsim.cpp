#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vfvr/metrics.hpp"
#include "vfvr/motorsim.hpp"

using namespace vfvr;

namespace {

TechniqueParams quiet() {
  TechniqueParams p;
  p.aim_sigma_deg = 0.0;
  p.amp_noise = 0.0;
  p.heisenberg_deg = 0.0;
  p.heisenberg_prob = 0.0;
  p.touch_sigma_mm = 0.0;
  p.mt_sigma = 0.0;
  p.path_sigma = 0.0;
  return p;
}

Condition cond(TechniqueKind k, double w, double d) { return {k, w, d, index_of_difficulty(d, w)}; }

std::vector<TrialRecord> run(const ConditionGeometry& g, const TechniqueParams& p, int sequences,
                             std::uint64_t seed = 99) {
  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(sequences) * g.order.size());
  for (int s = 0; s < sequences; ++s) {
    const auto seq = simulate_sequence(1, g, p, seed, s);
    out.insert(out.end(), seq.begin(), seq.end());
  }
  return out;
}

bool same_record(const TrialRecord& a, const TrialRecord& b) {
  return a.participant == b.participant && a.condition == b.condition && a.sequence_idx == b.sequence_idx &&
         a.trial_idx == b.trial_idx && a.target_index == b.target_index && a.from_point == b.from_point &&
         a.target_center == b.target_center && a.selection_point == b.selection_point && a.mt == b.mt &&
         a.hand_path == b.hand_path && a.head_path == b.head_path && a.outcome == b.outcome &&
         a.actual_depth == b.actual_depth && a.adj_visual_angle == b.adj_visual_angle;
}

}  // namespace

TEST(EndpointSigma, RaycastingFormula) {
  TechniqueParams p = quiet();
  p.aim_sigma_deg = 0.2;
  const auto l = layout_targets(11, 1.0, kLargeWidth, 5.0);
  const double s = effective_endpoint_sigma(TechniqueKind::Raycasting, p, default_panel(Pose{}), l, Pose{});
  EXPECT_NEAR(s, 5 * std::tan(deg_to_rad(0.2)), 1e-12);
  EXPECT_NEAR(s, 0.01745, 1e-5);
}

TEST(EndpointSigma, ZoomDoublingHalvesSigma) {
  const auto l = layout_targets(11, 1.0, kSmallWidth, 5.0);
  for (auto kind : {TechniqueKind::ViewfinderRay, TechniqueKind::ViewfinderTouch}) {
    TechniqueParams p = quiet();
    p.aim_sigma_deg = 0.5;
    p.touch_sigma_mm = 2.0;
    const auto a = configured_panel(kind, Pose{}, 60, 1.0, 1.25);
    const auto b = configured_panel(kind, Pose{}, 60, 2.0, 1.25);
    const double sa = effective_endpoint_sigma(kind, p, a, l, Pose{});
    const double sb = effective_endpoint_sigma(kind, p, b, l, Pose{});
    EXPECT_NEAR(sb / sa, 0.5, 1e-9) << technique_name(kind);
  }
}

TEST(EndpointSigma, MagnificationIsPlaneWidthOverPanelWidth) {
  const auto l = layout_targets(11, 1.0, kSmallWidth, 5.0);
  const auto cfg = configured_panel(TechniqueKind::ViewfinderRay, Pose{}, 60, 1.0, 1.0);
  const auto g = control_geometry(TechniqueKind::ViewfinderRay, cfg, l, Pose{});
  // Captured view reaches ±5·tan(30°) on the plane; panel is 0.4 m wide.
  EXPECT_NEAR(g.magnification, 2 * 5 * std::tan(deg_to_rad(30)) / 0.4, 1e-9);
}

TEST(EndpointSigma, ViewfinderNeedsConfiguredPanel) {
  const auto l = layout_targets(11, 1.0, kSmallWidth, 5.0);
  EXPECT_THROW(effective_endpoint_sigma(TechniqueKind::ViewfinderRay, quiet(), default_panel(Pose{}), l, Pose{}),
               std::logic_error);
}

TEST(Simulate, ZeroNoiseExact) {
  TechniqueParams p = quiet();
  p.fitts_a = 0.5;
  p.fitts_b = 0.25;
  p.angle_c = 0.0;
  for (auto kind : kAllTechniques) {
    Condition c = cond(kind, kLargeWidth, kShortDistance);
    c.id_nominal = 2.0;
    const auto g = make_condition_geometry(c, p);
    const auto ts = run(g, p, 3);
    ASSERT_EQ(ts.size(), 33u);
    for (const auto& t : ts) {
      EXPECT_EQ(t.selection_point, t.target_center);
      EXPECT_NEAR(t.mt, 1.0, 1e-12);
      EXPECT_EQ(t.outcome, Outcome::Hit);
    }
    const auto s = sequence_summary(ts);
    EXPECT_EQ(s.error_rate, 0.0);
    EXPECT_NEAR(s.w_e, 0.0, 1e-12);
    EXPECT_NEAR(s.d_e, task_axis_length(11, kShortDistance), 1e-9);
  }
}

TEST(Simulate, SequenceShape) {
  const auto params = MotorParams::defaults();
  const auto c = cond(TechniqueKind::ViewfinderTouch, kSmallWidth, kLongDistance);
  const auto g = make_condition_geometry(c, params[c.technique]);
  const auto ts = simulate_sequence(4, g, params[c.technique], 1, 2);
  ASSERT_EQ(ts.size(), 11u);
  EXPECT_EQ(ts[0].from_point, g.layout.centers[static_cast<std::size_t>(g.order.back())]);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    EXPECT_EQ(ts[k].target_index, g.order[k]);
    EXPECT_EQ(ts[k].participant, 4);
    EXPECT_EQ(ts[k].sequence_idx, 2);
    if (k > 0) {
      EXPECT_EQ(ts[k].from_point, ts[k - 1].selection_point);
    }
  }
}

TEST(Simulate, Deterministic) {
  const auto params = MotorParams::defaults();
  for (auto kind : kAllTechniques) {
    const auto c = cond(kind, kSmallWidth, kShortDistance);
    const auto g = make_condition_geometry(c, params[kind]);
    const auto a = simulate_sequence(3, g, params[kind], 777, 1);
    const auto b = simulate_sequence(3, g, params[kind], 777, 1);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(same_record(a[i], b[i]));
    const auto other = simulate_sequence(3, g, params[kind], 778, 1);
    EXPECT_FALSE(same_record(a[0], other[0]));
  }
}

TEST(Simulate, ThreadCountIndependent) {
  SimulationPlan plan;
  plan.participants = 3;
  const auto params = MotorParams::defaults();
  const auto one = simulate_experiment(plan, params, 20210901, 1);
  const auto four = simulate_experiment(plan, params, 20210901, 4);
  ASSERT_EQ(one.size(), 3u * 12 * 3 * 11);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) ASSERT_TRUE(same_record(one[i], four[i])) << i;
}

TEST(Simulate, MissRateMatchesCircleOracle) {
  const double r = kLargeWidth / 2;
  for (double ratio : {0.5, 1.0, 2.0}) {
    const double sigma = r / ratio;
    TechniqueParams p = quiet();
    // Raycasting from the origin spreads aim error over the 5 m control distance.
    p.aim_sigma_deg = rad_to_deg(std::atan(sigma / 5.0));
    const auto g = make_condition_geometry(cond(TechniqueKind::Raycasting, kLargeWidth, kShortDistance), p);
    ASSERT_NEAR(endpoint_model(TechniqueKind::Raycasting, p, g.control).sigma_plane, sigma, 1e-12);
    const auto ts = run(g, p, 9091);
    int beyond = 0;
    for (const auto& t : ts) beyond += t.outcome != Outcome::Hit;
    const double pct = 100.0 * beyond / static_cast<double>(ts.size());
    EXPECT_NEAR(pct, 100.0 * std::exp(-ratio * ratio / 2), 0.5) << "r/sigma " << ratio;
  }
}

TEST(Simulate, PerAxisSpreadMatchesSigma) {
  TechniqueParams p = quiet();
  p.aim_sigma_deg = 0.3;
  const auto g = make_condition_geometry(cond(TechniqueKind::Raycasting, kLargeWidth, kShortDistance), p);
  const double sigma = endpoint_model(TechniqueKind::Raycasting, p, g.control).sigma_plane;
  const auto ts = run(g, p, 9091);
  std::vector<double> dx, dy;
  for (const auto& t : ts) {
    dx.push_back(t.selection_point.x - t.target_center.x);
    dy.push_back(t.selection_point.y - t.target_center.y);
  }
  EXPECT_NEAR(sample_sd(dx) / sigma, 1.0, 0.015);
  EXPECT_NEAR(sample_sd(dy) / sigma, 1.0, 0.015);
}

TEST(Simulate, MovementTimeLognormalMean) {
  TechniqueParams p = quiet();
  p.fitts_a = 0.4;
  p.fitts_b = 0.3;
  p.angle_c = 0.0;
  p.mt_sigma = 0.3;
  const auto c = cond(TechniqueKind::Raycasting, kSmallWidth, kLongDistance);
  const auto g = make_condition_geometry(c, p);
  const auto ts = run(g, p, 9091);
  double sum = 0;
  for (const auto& t : ts) sum += t.mt;
  const double expected = (0.4 + 0.3 * c.id_nominal) * std::exp(0.3 * 0.3 / 2);
  EXPECT_NEAR(sum / static_cast<double>(ts.size()) / expected, 1.0, 0.01);
}

TEST(Simulate, MovementTimeFloor) {
  TechniqueParams p = quiet();
  p.fitts_a = 0.0;
  p.fitts_b = 0.05;
  p.angle_c = 0.0;
  p.mt_sigma = 1.0;
  const auto g = make_condition_geometry(cond(TechniqueKind::Raycasting, kLargeWidth, kShortDistance), p);
  int floored = 0;
  for (const auto& t : run(g, p, 2000)) {
    EXPECT_GE(t.mt, kMinMovementTime);
    floored += t.mt == kMinMovementTime;
  }
  EXPECT_GT(floored, 0);
}

TEST(Simulate, PropertyMissRateNonIncreasingInZoom) {
  const auto params = MotorParams::defaults();
  for (auto kind : {TechniqueKind::ViewfinderRay, TechniqueKind::ViewfinderTouch}) {
    TechniqueParams p = params[kind];
    const auto c = cond(kind, kSmallWidth, kLongDistance);
    const auto l = layout_targets(11, c.layout_diameter, c.target_width, kTargetDepth);
    const double hi = zoom_bounds(l, kDefaultCaptureHFov).second;
    int prev = std::numeric_limits<int>::max();
    for (double f = 0.2; f <= 1.0 + 1e-9; f += 0.1) {
      p.set_zoom(c.target_width, c.layout_diameter, f * hi);
      const auto g = make_condition_geometry(c, p);
      int misses = 0;
      for (const auto& t : run(g, p, 200, 5)) misses += t.outcome != Outcome::Hit;
      EXPECT_LE(misses, prev) << technique_name(kind) << " zoom " << f * hi;
      prev = misses;
    }
  }
}

TEST(Simulate, ZoomOutsideFeasibleRangeRejected) {
  TechniqueParams p = MotorParams::defaults()[TechniqueKind::ViewfinderRay];
  p.set_zoom(kSmallWidth, kLongDistance, 15.0);
  EXPECT_THROW(make_condition_geometry(cond(TechniqueKind::ViewfinderRay, kSmallWidth, kLongDistance), p),
               std::invalid_argument);
}

TEST(Simulate, BehaviorMeasures) {
  const auto params = MotorParams::defaults();
  const auto rc = make_condition_geometry(cond(TechniqueKind::Raycasting, kLargeWidth, kShortDistance),
                                          params[TechniqueKind::Raycasting]);
  const auto vt = make_condition_geometry(cond(TechniqueKind::ViewfinderTouch, kLargeWidth, kShortDistance),
                                          params[TechniqueKind::ViewfinderTouch]);
  EXPECT_NEAR(rc.adj_visual_angle, 3.0, 0.01);
  EXPECT_GT(vt.adj_visual_angle, rc.adj_visual_angle);
  for (const auto& t : run(rc, params[TechniqueKind::Raycasting], 3)) EXPECT_NEAR(t.actual_depth, 5.0, 0.05);
  for (const auto& t : run(vt, params[TechniqueKind::ViewfinderTouch], 3)) EXPECT_NEAR(t.actual_depth, 0.40, 0.05);
}

TEST(Params, ValidateRejectsNegative) {
  TechniqueParams p;
  p.hand_gain = -1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.heisenberg_prob = 1.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  EXPECT_TRUE(std::isnan(p.zoom_for(0.1, 1.0)));
  p.set_zoom(0.1, 1.0, 2.0);
  p.set_zoom(0.1, 1.0, 3.0);
  EXPECT_EQ(p.config_zoom.size(), 1u);
  EXPECT_EQ(p.zoom_for(0.1, 1.0), 3.0);
}
