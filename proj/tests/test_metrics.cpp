#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vfvr/metrics.hpp"

using namespace vfvr;

namespace {

TrialRecord trial(const Vec3& from, const Vec3& target, const Vec3& select, double width, double mt = 1.0) {
  TrialRecord t;
  t.condition = {TechniqueKind::Raycasting, width, 1.0, 0.0};
  t.from_point = from;
  t.target_center = target;
  t.selection_point = select;
  t.mt = mt;
  t.hand_path = 0.5 * mt;
  t.head_path = 0.1 * mt;
  t.actual_depth = 5.0;
  t.adj_visual_angle = 3.0;
  return t;
}

// Alternating reciprocal task along x with Gaussian along-axis and cross-axis noise.
std::vector<TrialRecord> gaussian_trials(std::mt19937_64& rng, int n, double sigma, double width, double dist = 1.0) {
  std::normal_distribution<double> g(0.0, sigma);
  std::uniform_real_distribution<double> mt(0.5, 1.5);
  std::vector<TrialRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double sign = i % 2 ? -1.0 : 1.0;
    const Vec3 from{-sign * dist / 2, 0, 5}, target{sign * dist / 2, 0, 5};
    const Vec3 sel = target + Vec3{sign * g(rng), g(rng), 0};
    out.push_back(trial(from, target, sel, width, mt(rng)));
  }
  return out;
}

Vec3 rigid(const Vec3& p, const Rotation& r, const Vec3& t) { return r.rotate(p) + t; }

}  // namespace

TEST(Classify, Boundaries) {
  const Vec3 c{0, 0, 5};
  const double w = 0.2, r = 0.1;
  EXPECT_EQ(classify_trial(c, c, w), Outcome::Hit);
  EXPECT_EQ(classify_trial(c + Vec3{r, 0, 0}, c, w), Outcome::Hit);
  EXPECT_EQ(classify_trial(c + Vec3{r * 1.0001, 0, 0}, c, w), Outcome::Miss);
  EXPECT_EQ(classify_trial(c + Vec3{0, 2.9 * r, 0}, c, w), Outcome::Miss);
  EXPECT_EQ(classify_trial(c + Vec3{0, 3.1 * r, 0}, c, w), Outcome::Outlier);
}

TEST(ProjectDx, Examples) {
  const Vec3 from{0, 0, 0}, target{1, 0, 0};
  auto p = project_dx(from, target, target);
  EXPECT_NEAR(p.dx, 0.0, 1e-15);
  EXPECT_NEAR(p.effective, 1.0, 1e-15);
  p = project_dx(from, target, {1.1, 0, 0});
  EXPECT_NEAR(p.dx, 0.1, 1e-12);
  EXPECT_NEAR(p.effective, 1.1, 1e-12);
  p = project_dx(from, target, {1, 0.2, 0});
  EXPECT_NEAR(p.dx, 0.0, 1e-12);
  EXPECT_NEAR(p.effective, 1.0, 1e-12);
  EXPECT_THROW(project_dx(target, target, from), std::domain_error);
}

TEST(ProjectDx, PropertyMatchesDotProduct) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 f{u(rng), u(rng), 5}, t{u(rng), u(rng), 5}, s{u(rng), u(rng), 5};
    if (distance(f, t) < 1e-3) continue;
    const Vec3 axis = (t - f).normalized();
    EXPECT_NEAR(project_dx(f, t, s).dx, dot(s - t, axis), 1e-9);
  }
}

TEST(Summary, DegenerateFlagged) {
  std::vector<TrialRecord> ts;
  for (int i = 0; i < 11; ++i) {
    const double sign = i % 2 ? -1.0 : 1.0;
    ts.push_back(trial({-sign, 0, 5}, {sign, 0, 5}, {sign, 0, 5}, 0.2));
  }
  const auto s = sequence_summary(ts);
  EXPECT_EQ(s.error_rate, 0.0);
  EXPECT_EQ(s.sd_x, 0.0);
  EXPECT_EQ(s.w_e, 0.0);
  EXPECT_FALSE(s.valid);
  EXPECT_TRUE(std::isinf(s.id_e));
}

TEST(Summary, TooFewUsableThrows) {
  std::vector<TrialRecord> ts{trial({0, 0, 5}, {1, 0, 5}, {1, 0, 5}, 0.2), trial({1, 0, 5}, {0, 0, 5}, {0, 0, 5}, 0.2),
                              trial({0, 0, 5}, {1, 0, 5}, {3, 0, 5}, 0.2)};
  EXPECT_THROW(sequence_summary(ts), std::invalid_argument);
}

TEST(Summary, OutliersExcludedMissesKept) {
  std::vector<TrialRecord> ts;
  const double w = 0.2;
  for (int i = 0; i < 4; ++i) ts.push_back(trial({0, 0, 5}, {1, 0, 5}, {1.0 + 0.01 * i, 0, 5}, w, 1.0));
  ts.push_back(trial({0, 0, 5}, {1, 0, 5}, {1.15, 0, 5}, w, 1.0));  // miss
  ts.push_back(trial({0, 0, 5}, {1, 0, 5}, {1.5, 0, 5}, w, 9.0));   // outlier
  const auto s = sequence_summary(ts);
  EXPECT_EQ(s.n_used, 5);
  EXPECT_EQ(s.n_outliers, 1);
  EXPECT_NEAR(s.error_rate, 20.0, 1e-12);
  EXPECT_NEAR(s.mt_mean, 1.0, 1e-12);
  EXPECT_NEAR(s.d_e, (1.0 + 1.01 + 1.02 + 1.03 + 1.15) / 5, 1e-12);
}

TEST(Summary, EffectiveWidthFromKnownSigma) {
  std::mt19937_64 rng(12);
  const auto ts = gaussian_trials(rng, 100000, 0.1, 10.0);
  const auto s = sequence_summary(ts);
  EXPECT_NEAR(s.w_e, 0.4133, 0.4133 * 0.02);
}

TEST(Summary, ThroughputArithmetic) {
  const double id = std::log2(1.0 / 0.4133 + 1.0);
  EXPECT_NEAR(id, 1.774, 5e-4);
  EXPECT_NEAR(1.0 / 0.4133 + 1.0, 3.4196, 1e-4);
  // Three endpoints at dx = −s, 0, +s give sd_x = s, so choose s = 0.1 and D = 1.
  std::vector<TrialRecord> ts{trial({0, 0, 5}, {1, 0, 5}, {0.9, 0, 5}, 0.5), trial({0, 0, 5}, {1, 0, 5}, {1, 0, 5}, 0.5),
                              trial({0, 0, 5}, {1, 0, 5}, {1.1, 0, 5}, 0.5)};
  const auto s = sequence_summary(ts);
  EXPECT_NEAR(s.d_e, 1.0, 1e-12);
  EXPECT_NEAR(s.sd_x, 0.1, 1e-12);
  EXPECT_NEAR(s.w_e, 0.4133, 1e-12);
  EXPECT_NEAR(s.id_e, id, 1e-12);
  EXPECT_NEAR(s.throughput, id, 1e-12);
}

TEST(Summary, PropertyScaleInvariance) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> k(0.1, 10);
  for (int rep = 0; rep < 50; ++rep) {
    const auto base = gaussian_trials(rng, 11, 0.05, 0.15);
    const double s = k(rng);
    std::vector<TrialRecord> scaled = base;
    for (auto& t : scaled) {
      t.from_point = t.from_point * s;
      t.target_center = t.target_center * s;
      t.selection_point = t.selection_point * s;
      t.condition.target_width *= s;
    }
    const auto a = sequence_summary(base), b = sequence_summary(scaled);
    EXPECT_NEAR(b.d_e, s * a.d_e, 1e-9 * s);
    EXPECT_NEAR(b.sd_x, s * a.sd_x, 1e-9 * s);
    EXPECT_NEAR(b.w_e, s * a.w_e, 1e-9 * s);
    EXPECT_NEAR(b.id_e, a.id_e, 1e-9);
    EXPECT_DOUBLE_EQ(b.error_rate, a.error_rate);
    EXPECT_NEAR(b.throughput, a.throughput, 1e-9);
  }
}

TEST(Summary, PropertyRigidMotionInvariance) {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 50; ++rep) {
    const auto base = gaussian_trials(rng, 11, 0.05, 0.15);
    const Rotation r = Rotation{n(rng), n(rng), n(rng), n(rng)}.normalized();
    const Vec3 t{n(rng), n(rng), n(rng)};
    std::vector<TrialRecord> moved = base;
    for (auto& x : moved) {
      x.from_point = rigid(x.from_point, r, t);
      x.target_center = rigid(x.target_center, r, t);
      x.selection_point = rigid(x.selection_point, r, t);
    }
    const auto a = sequence_summary(base), b = sequence_summary(moved);
    EXPECT_NEAR(b.d_e, a.d_e, 1e-9);
    EXPECT_NEAR(b.sd_x, a.sd_x, 1e-9);
    EXPECT_NEAR(b.throughput, a.throughput, 1e-9);
    EXPECT_DOUBLE_EQ(b.error_rate, a.error_rate);
  }
}

TEST(Summary, PropertyEffectiveWidthCoversNinetySixPercent) {
  std::mt19937_64 rng(23);
  const auto ts = gaussian_trials(rng, 100000, 0.1, 10.0);
  const auto s = sequence_summary(ts);
  int inside = 0;
  for (const auto& t : ts)
    if (std::abs(project_dx(t.from_point, t.target_center, t.selection_point).dx) <= s.w_e / 2) ++inside;
  const double frac = 100.0 * inside / static_cast<double>(ts.size());
  EXPECT_GT(frac, 95.5);
  EXPECT_LT(frac, 96.5);
}

TEST(Summary, PropertyHalvesUnion) {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 50; ++rep) {
    const auto all = gaussian_trials(rng, 22, 0.05, 0.3);
    const std::span<const TrialRecord> whole(all);
    const auto a = sequence_summary(whole.first(11)), b = sequence_summary(whole.last(11)), u = sequence_summary(whole);
    EXPECT_NEAR(u.mt_mean, (a.mt_mean + b.mt_mean) / 2, 1e-12);
    EXPECT_NEAR(u.d_e, (a.d_e + b.d_e) / 2, 1e-12);
    EXPECT_NEAR(u.hand_movement, (a.hand_movement + b.hand_movement) / 2, 1e-12);
    EXPECT_NEAR(u.head_movement, (a.head_movement + b.head_movement) / 2, 1e-12);
    EXPECT_NEAR(u.actual_depth, (a.actual_depth + b.actual_depth) / 2, 1e-12);
  }
}

TEST(Fitts, NoiselessRecovery) {
  std::vector<std::pair<double, double>> pts;
  for (double id : {1.0, 2.27, 3.11, 3.64, 4.58, 6.0}) pts.emplace_back(id, 0.5 + 0.4 * id);
  const auto f = fitts_regression(pts);
  EXPECT_NEAR(f.a, 0.5, 1e-9);
  EXPECT_NEAR(f.b, 0.4, 1e-9);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-9);
}

TEST(Fitts, EqualTimesGiveFlatLine) {
  std::vector<std::pair<double, double>> pts{{2.27, 2}, {3.11, 2}, {3.64, 2}, {4.58, 2}};
  const auto f = fitts_regression(pts);
  EXPECT_NEAR(f.b, 0.0, 1e-12);
  EXPECT_EQ(f.r_squared, 0.0);
}

TEST(Fitts, RaycastingTableMeansAgainstClosedForm) {
  const double x[4] = {2.27, 3.11, 3.64, 4.58}, y[4] = {1.45, 1.94, 2.87, 3.28};
  // Closed form with raw sums: b = (nΣxy − ΣxΣy)/(nΣx² − (Σx)²), a = (Σy − bΣx)/n.
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  const double b = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
  const double a = (sy - b * sx) / 4;
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 4; ++i) pts.emplace_back(x[i], y[i]);
  const auto f = fitts_regression(pts);
  EXPECT_NEAR(f.b, b, 1e-9);
  EXPECT_NEAR(f.a, a, 1e-9);
  EXPECT_NEAR(f.b, 0.84, 0.01);
  EXPECT_NEAR(f.a, -0.467, 0.001);
}

TEST(Fitts, RejectsSingleId) {
  std::vector<std::pair<double, double>> pts{{3, 1}, {3, 2}};
  EXPECT_THROW(fitts_regression(pts), std::invalid_argument);
}

TEST(Tlx, WeightedArithmetic) {
  TlxResponse r;
  r.weights = {5, 4, 3, 2, 1, 0};
  r.ratings = {100, 0, 0, 0, 0, 0};
  EXPECT_NEAR(tlx_weighted(r), 33.3333333333, 1e-9);
  EXPECT_NEAR(tlx_raw(r), 100.0 / 6, 1e-12);
}

TEST(Tlx, ConstantRatings) {
  TlxResponse r;
  r.ratings.fill(50);
  for (auto w : {std::array<int, 6>{5, 4, 3, 2, 1, 0}, std::array<int, 6>{3, 3, 3, 2, 2, 2}}) {
    r.weights = w;
    EXPECT_DOUBLE_EQ(tlx_weighted(r), 50.0);
  }
}

TEST(Tlx, InvalidWeights) {
  TlxResponse r;
  r.weights = {0, 0, 0, 0, 0, 15};
  EXPECT_THROW(tlx_weighted(r), std::invalid_argument);
  r.weights = {5, 5, 4, 0, 0, 0};
  EXPECT_THROW(tlx_weighted(r), std::invalid_argument);
}
