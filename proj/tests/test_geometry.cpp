#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vfvr/geometry.hpp"

using namespace vfvr;

namespace {

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Rotation{n(rng), n(rng), n(rng), n(rng)}.normalized();
}

void expect_vec_near(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

Panel facing_panel(const Vec3& center) {
  Panel p;
  p.pose.position = center;  // identity orientation: front face looks back toward −z
  return p;
}

}  // namespace

TEST(RayPlane, AxisAligned) {
  const auto p = ray_plane_intersect({{0, 0, 0}, {0, 0, 1}}, {{0, 0, 5}, {0, 0, -1}});
  ASSERT_TRUE(p);
  expect_vec_near(*p, {0, 0, 5}, 1e-12);
}

TEST(RayPlane, ParallelMisses) {
  EXPECT_FALSE(ray_plane_intersect({{0, 0, 0}, {1, 0, 0}}, {{0, 0, 5}, {0, 0, -1}}));
}

TEST(RayPlane, BehindOriginMisses) {
  EXPECT_FALSE(ray_plane_intersect({{0, 0, 0}, {0, 0, -1}}, {{0, 0, 5}, {0, 0, -1}}));
}

TEST(RayPlane, SlopedRayHitsAxis) {
  const Ray r{{0, 1, 0}, Vec3{0, -1, 5}.normalized()};
  const auto p = ray_plane_intersect(r, {{0, 0, 5}, {0, 0, -1}});
  ASSERT_TRUE(p);
  expect_vec_near(*p, {0, 0, 5}, 1e-9);
}

TEST(RayPlane, PropertyResultLiesOnPlane) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  int hits = 0;
  for (int i = 0; i < 2000; ++i) {
    const Plane pl{{u(rng), u(rng), u(rng)}, Vec3{u(rng), u(rng), u(rng)}.normalized()};
    const Ray r = Ray::through({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    if (const auto p = ray_plane_intersect(r, pl)) {
      ++hits;
      EXPECT_LT(std::abs(pl.signed_distance(*p)), 1e-9);
    }
  }
  EXPECT_GT(hits, 100);
}

TEST(PanelUv, CenterHit) {
  const Panel p = facing_panel({0, 0, 1});
  const auto uv = ray_panel_uv({{0, 0, 0}, {0, 0, 1}}, p);
  ASSERT_TRUE(uv);
  EXPECT_NEAR(uv->u, 0.5, 1e-12);
  EXPECT_NEAR(uv->v, 0.5, 1e-12);
}

TEST(PanelUv, OneCentimeterLeft) {
  const Panel p = facing_panel({0, 0, 1});
  const auto uv = ray_panel_uv({{-0.01, 0, 0}, {0, 0, 1}}, p);
  ASSERT_TRUE(uv);
  EXPECT_NEAR(uv->u, 0.475, 1e-12);
  EXPECT_NEAR(uv->v, 0.5, 1e-12);
}

TEST(PanelUv, OutsideRectangleMisses) {
  const Panel p = facing_panel({0, 0, 1});
  EXPECT_FALSE(ray_panel_uv({{0.3, 0, 0}, {0, 0, 1}}, p));
}

TEST(TouchUv, HoverInFront) {
  const Panel p = facing_panel({0, 0, 1});
  const TouchUV t = touch_panel_uv({0, 0, 0.995}, p);
  EXPECT_NEAR(t.u, 0.5, 1e-12);
  EXPECT_NEAR(t.v, 0.5, 1e-12);
  EXPECT_NEAR(t.signed_depth, 0.005, 1e-12);
  EXPECT_FALSE(t.triggers());
}

TEST(TouchUv, OnSurfaceTriggers) {
  const Panel p = facing_panel({0, 0, 1});
  const TouchUV t = touch_panel_uv({0, 0, 1}, p);
  EXPECT_NEAR(t.signed_depth, 0.0, 1e-15);
  EXPECT_TRUE(t.triggers());
}

TEST(TouchUv, PenetratedOffCenter) {
  const Panel p = facing_panel({0, 0, 1});
  const TouchUV t = touch_panel_uv({0.1, 0, 1.002}, p);
  EXPECT_NEAR(t.u, 0.75, 1e-12);
  EXPECT_NEAR(t.v, 0.5, 1e-12);
  EXPECT_NEAR(t.signed_depth, -0.002, 1e-12);
  EXPECT_TRUE(t.in_bounds);
}

TEST(TouchUv, OutOfBoundsIsClampedAndFlagged) {
  const Panel p = facing_panel({0, 0, 1});
  const TouchUV t = touch_panel_uv({0.5, 0, 1}, p);
  EXPECT_FALSE(t.in_bounds);
  EXPECT_DOUBLE_EQ(t.u, 1.0);
}

TEST(PanelUv, PropertyInverseConsistent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0), pos(-2, 2), scale(0.2, 3.0);
  for (int i = 0; i < 1000; ++i) {
    Panel p;
    p.pose = {{pos(rng), pos(rng), pos(rng)}, random_rotation(rng)};
    p.panel_scale = scale(rng);
    const double u = unit(rng), v = unit(rng);
    const Vec3 q = p.point_at(u, v);
    const Ray r = Ray::through(q + p.front_normal() * 0.7 + p.right() * 0.1, q);
    const auto uv = ray_panel_uv(r, p);
    ASSERT_TRUE(uv);
    EXPECT_NEAR(uv->u, u, 1e-9);
    EXPECT_NEAR(uv->v, v, 1e-9);
    const TouchUV t = touch_panel_uv(q - p.front_normal() * 0.001, p);
    EXPECT_NEAR(t.u, u, 1e-9);
    EXPECT_NEAR(t.v, v, 1e-9);
    EXPECT_NEAR(t.signed_depth, -0.001, 1e-9);
  }
}

TEST(UvToWorldRay, RejectsLiveView) { EXPECT_THROW(uv_to_world_ray(std::nullopt, 0.5, 0.5), std::logic_error); }

TEST(UvToWorldRay, PinholeOffsets) {
  CapturedView view;
  const Ray r = uv_to_world_ray(view, 1.0, 0.5);
  expect_vec_near(r.direction, Vec3{std::tan(deg_to_rad(30)), 0, 1}.normalized(), 1e-12);
  EXPECT_NEAR(r.direction.x / r.direction.z, 0.5773502691896257, 1e-12);
  view.zoom = 2.0;
  const Ray z = uv_to_world_ray(view, 1.0, 0.5);
  EXPECT_NEAR(z.direction.x / z.direction.z, 0.28867513459481287, 1e-12);
}

TEST(UvToWorldRay, PropertyCenterIsForward) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    CapturedView view;
    view.orientation = random_rotation(rng);
    view.origin = {1, 2, 3};
    const Ray r = uv_to_world_ray(view, 0.5, 0.5);
    expect_vec_near(r.direction, view.orientation.forward(), 1e-9);
    expect_vec_near(r.origin, view.origin, 0.0);
  }
}

TEST(UvToWorldRay, PropertyZoomHalvesDeflection) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(0.0, 1.0), zoom(0.1, 8.0);
  for (int i = 0; i < 500; ++i) {
    CapturedView view;
    view.orientation = random_rotation(rng);
    view.zoom = zoom(rng);
    const double u = unit(rng), v = unit(rng);
    const auto tangents = [&](const CapturedView& cv) {
      const Vec3 d = uv_to_world_ray(cv, u, v).direction;
      const double f = dot(d, cv.orientation.forward());
      return std::pair{dot(d, cv.orientation.right()) / f, dot(d, cv.orientation.up()) / f};
    };
    const auto a = tangents(view);
    CapturedView doubled = view;
    doubled.zoom *= 2;
    const auto b = tangents(doubled);
    EXPECT_NEAR(b.first, a.first / 2, 1e-9);
    EXPECT_NEAR(b.second, a.second / 2, 1e-9);
  }
}

TEST(CapturedView, ProjectInvertsReconstruction) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    CapturedView view;
    view.orientation = random_rotation(rng);
    view.origin = {0.3, -0.2, 0.1};
    const double u = unit(rng), v = unit(rng);
    const auto uv = view.project(uv_to_world_ray(view, u, v).at(3.7));
    ASSERT_TRUE(uv);
    EXPECT_NEAR(uv->first, u, 1e-9);
    EXPECT_NEAR(uv->second, v, 1e-9);
  }
}

TEST(VisualAngle, PaperTargets) {
  EXPECT_NEAR(visual_angle(0.2619, 5.0), 3.0005, 1e-4);
  EXPECT_NEAR(visual_angle(0.0873, 5.0), 1.0004, 1e-4);
  EXPECT_NEAR(visual_angle(0.2619, 5.0), 3.0, 0.01);
  EXPECT_NEAR(visual_angle(0.0873, 5.0), 1.0, 0.01);
}

TEST(VisualAngle, InverseIdentity) { EXPECT_NEAR(visual_angle(2 * std::tan(deg_to_rad(0.5)), 1.0), 1.0, 1e-12); }

TEST(VisualAngle, RejectsNonPositive) {
  EXPECT_THROW(visual_angle(0.0, 1.0), std::domain_error);
  EXPECT_THROW(visual_angle(1.0, -1.0), std::domain_error);
}

TEST(VisualAngle, PropertyMonotoneAndScaleInvariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> w(0.001, 3), d(0.05, 20), k(0.01, 100);
  for (int i = 0; i < 1000; ++i) {
    const double a = w(rng), b = d(rng), s = k(rng);
    EXPECT_LT(visual_angle(a, b), visual_angle(a * 1.01, b));
    EXPECT_GT(visual_angle(a, b), visual_angle(a, b * 1.01));
    EXPECT_NEAR(visual_angle(a, b), visual_angle(s * a, s * b), 1e-10);
  }
}

TEST(Rotation, YawPitchBasis) {
  const Rotation r = Rotation::yaw_pitch(90, 0);
  expect_vec_near(r.forward(), {1, 0, 0}, 1e-12);
  const Rotation pitch = Rotation::axis_angle(kRight, 30);
  EXPECT_LT(pitch.forward().y, 0.0);  // positive pitch about +x tips forward downward
}

TEST(Vec3, NormalizeZeroThrows) { EXPECT_THROW(Vec3{}.normalized(), std::domain_error); }
