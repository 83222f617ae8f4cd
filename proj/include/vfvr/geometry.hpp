#pragma once

// 3D primitives for the selection simulator.
//
// World frame: x right, y up, z forward from the participant's initial head
// position. All lengths are meters, all user-facing angles are degrees.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>

namespace vfvr {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kGeomTol = 1e-9;
inline constexpr double kParallelTol = 1e-12;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  Vec3 normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw std::domain_error("cannot normalize a zero vector");
    return *this / n;
  }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

inline constexpr Vec3 kRight{1.0, 0.0, 0.0};
inline constexpr Vec3 kUp{0.0, 1.0, 0.0};
inline constexpr Vec3 kForward{0.0, 0.0, 1.0};

/// Unit quaternion rotation (w + xi + yj + zk).
struct Rotation {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Rotation identity() { return {}; }

  /// Right-hand rotation by `angle_deg` about `axis`.
  static Rotation axis_angle(const Vec3& axis, double angle_deg) {
    const Vec3 a = axis.normalized();
    const double half = 0.5 * deg_to_rad(angle_deg);
    const double s = std::sin(half);
    return {std::cos(half), a.x * s, a.y * s, a.z * s};
  }

  /// Yaw about +y, then pitch about the yawed +x. Positive pitch tips the
  /// forward axis downward: (0,0,1) -> (0, -sin p, cos p).
  static Rotation yaw_pitch(double yaw_deg, double pitch_deg) {
    return axis_angle(kUp, yaw_deg) * axis_angle(kRight, pitch_deg);
  }

  Rotation operator*(const Rotation& o) const {
    return {w * o.w - x * o.x - y * o.y - z * o.z, w * o.x + x * o.w + y * o.z - z * o.y,
            w * o.y - x * o.z + y * o.w + z * o.x, w * o.z + x * o.y - y * o.x + z * o.w};
  }

  Rotation conjugate() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
  Rotation normalized() const {
    const double n = norm();
    return {w / n, x / n, y / n, z / n};
  }

  Vec3 rotate(const Vec3& v) const {
    // v' = v + 2w(q×v) + 2q×(q×v)
    const Vec3 q{x, y, z};
    const Vec3 t = 2.0 * cross(q, v);
    return v + w * t + cross(q, t);
  }

  Vec3 right() const { return rotate(kRight); }
  Vec3 up() const { return rotate(kUp); }
  Vec3 forward() const { return rotate(kForward); }

  bool operator==(const Rotation&) const = default;
};

struct Pose {
  Vec3 position;
  Rotation orientation;

  bool operator==(const Pose&) const = default;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit

  static Ray through(const Vec3& origin, const Vec3& point) {
    return {origin, (point - origin).normalized()};
  }
  Vec3 at(double t) const { return origin + direction * t; }
};

struct Plane {
  Vec3 point;
  Vec3 normal;  // unit

  double signed_distance(const Vec3& p) const { return dot(p - point, normal); }
};

inline std::optional<Vec3> ray_plane_intersect(const Ray& ray, const Plane& plane) {
  const double denom = dot(ray.direction, plane.normal);
  if (std::abs(denom) < kParallelTol) return std::nullopt;
  const double t = dot(plane.point - ray.origin, plane.normal) / denom;
  if (!(t > 0.0)) return std::nullopt;
  return ray.at(t);
}

/// Angular size in degrees of an object of `width` seen at `distance`.
inline double visual_angle(double width, double distance) {
  if (!(width > 0.0) || !(distance > 0.0))
    throw std::domain_error("visual_angle: width and distance must be positive");
  return rad_to_deg(2.0 * std::atan(width / (2.0 * distance)));
}

/// Vertical fov that gives a 4:3 image for the given horizontal fov.
inline double vfov_for_aspect(double h_fov_deg, double aspect = 4.0 / 3.0) {
  return rad_to_deg(2.0 * std::atan(std::tan(deg_to_rad(h_fov_deg) / 2.0) / aspect));
}

// A frozen pinhole camera. The panel shows this frustum; zoom narrows it.
struct CapturedView {
  Vec3 origin;
  Rotation orientation;
  double h_fov = 60.0;
  double v_fov = vfov_for_aspect(60.0);
  double zoom = 1.0;

  static constexpr double kMinZoom = 0.05;
  static constexpr double kMaxZoom = 20.0;

  double tan_half_h() const { return std::tan(deg_to_rad(h_fov) / 2.0) / zoom; }
  double tan_half_v() const { return std::tan(deg_to_rad(v_fov) / 2.0) / zoom; }

  void validate() const {
    if (!(h_fov > 0.0 && h_fov < 180.0 && v_fov > 0.0 && v_fov < 180.0))
      throw std::invalid_argument("CapturedView: fov must lie in (0, 180) degrees");
    if (!(zoom >= kMinZoom && zoom <= kMaxZoom))
      throw std::invalid_argument("CapturedView: zoom out of [0.05, 20]");
  }

  /// Image coordinates of a world point; (0.5, 0.5) is the optical axis.
  /// Empty when the point is at or behind the view origin.
  std::optional<std::pair<double, double>> project(const Vec3& p) const {
    const Vec3 rel = p - origin;
    const double zc = dot(rel, orientation.forward());
    if (!(zc > 0.0)) return std::nullopt;
    const double xc = dot(rel, orientation.right()) / zc;
    const double yc = dot(rel, orientation.up()) / zc;
    return std::pair{0.5 + 0.5 * xc / tan_half_h(), 0.5 + 0.5 * yc / tan_half_v()};
  }

  bool operator==(const CapturedView&) const = default;
};

enum class PanelState { PreConfig, Configured };

struct PanelUV {
  double u = 0.0;
  double v = 0.0;
};

struct TouchUV {
  double u = 0.0;
  double v = 0.0;
  double signed_depth = 0.0;  // < 0 once the fingertip is past the front face
  bool in_bounds = true;

  bool triggers() const { return signed_depth <= 0.0; }
};

/// The viewfinder panel. Local +x is panel right, +y panel up, +z points away
/// from the user; the front (display) face looks along -z.
struct Panel {
  Pose pose;
  double width = 0.4;
  double height = 0.3;
  double thickness = 0.01;
  double panel_scale = 1.0;
  std::optional<CapturedView> view;  // empty while the view is live
  PanelState state = PanelState::PreConfig;

  static constexpr double kMinScale = 0.1;
  static constexpr double kMaxScale = 10.0;

  double scaled_width() const { return width * panel_scale; }
  double scaled_height() const { return height * panel_scale; }
  Vec3 right() const { return pose.orientation.right(); }
  Vec3 up() const { return pose.orientation.up(); }
  Vec3 front_normal() const { return -pose.orientation.forward(); }
  Plane front_plane() const { return {pose.position, front_normal()}; }

  /// World point of panel coordinates (u, v) on the front face.
  Vec3 point_at(double u, double v) const {
    return pose.position + right() * ((u - 0.5) * scaled_width()) +
           up() * ((v - 0.5) * scaled_height());
  }

  bool operator==(const Panel&) const = default;

  PanelUV uv_of(const Vec3& p) const {
    const Vec3 rel = p - pose.position;
    return {0.5 + dot(rel, right()) / scaled_width(), 0.5 + dot(rel, up()) / scaled_height()};
  }
};

inline bool uv_inside(double u, double v) { return u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0; }

inline std::optional<PanelUV> ray_panel_uv(const Ray& ray, const Panel& panel) {
  const auto hit = ray_plane_intersect(ray, panel.front_plane());
  if (!hit) return std::nullopt;
  const PanelUV uv = panel.uv_of(*hit);
  if (!uv_inside(uv.u, uv.v)) return std::nullopt;
  return uv;
}

/// Perpendicular projection of a fingertip onto the panel's front face.
inline TouchUV touch_panel_uv(const Vec3& fingertip, const Panel& panel) {
  const PanelUV raw = panel.uv_of(fingertip);
  TouchUV out;
  out.in_bounds = uv_inside(raw.u, raw.v);
  out.u = std::clamp(raw.u, 0.0, 1.0);
  out.v = std::clamp(raw.v, 0.0, 1.0);
  out.signed_depth = panel.front_plane().signed_distance(fingertip);
  return out;
}

inline Ray uv_to_world_ray(const std::optional<CapturedView>& view, double u, double v) {
  if (!view) throw std::logic_error("uv_to_world_ray: panel view is still live (not configured)");
  const Rotation& q = view->orientation;
  const Vec3 dir = q.forward() + q.right() * ((2.0 * u - 1.0) * view->tan_half_h()) +
                   q.up() * ((2.0 * v - 1.0) * view->tan_half_v());
  return {view->origin, dir.normalized()};
}

}  // namespace vfvr
