#pragma once

// The three selection techniques: plain raycasting and the two viewfinder
// panel modes (ray onto panel, fingertip touch on panel).

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <variant>

#include "vfvr/geometry.hpp"
#include "vfvr/taskgen.hpp"

namespace vfvr {

// Pre-configuration panel placement relative to the head.
inline constexpr double kPanelForward = 0.4;
inline constexpr double kPanelBelow = 0.15;
inline constexpr double kPanelInclination = 30.0;
inline constexpr double kDefaultCaptureHFov = 60.0;

struct PanelConfig {
  Panel panel;
  Pose head_pose_at_capture;
  Vec3 placement_offset{0.0, -kPanelBelow, kPanelForward};
  double inclination = kPanelInclination;
  double capture_h_fov = kDefaultCaptureHFov;

  bool configured() const { return panel.state == PanelState::Configured && panel.view.has_value(); }
  bool operator==(const PanelConfig&) const = default;
};

namespace cmd {
struct Grab {
  Pose target_pose;
};
struct SetViewZoom {
  double factor = 1.0;
};
struct SetPanelScale {
  double factor = 1.0;
};
struct Reset {};
}  // namespace cmd

using ConfigCommand = std::variant<cmd::Grab, cmd::SetViewZoom, cmd::SetPanelScale, cmd::Reset>;

namespace detail {
inline Rotation heading_of(const Pose& head) {
  const Vec3 f = head.orientation.forward();
  return Rotation::axis_angle(kUp, rad_to_deg(std::atan2(f.x, f.z)));
}
}  // namespace detail

/// Panel attached to the head (heading only), tilted back by the inclination,
/// with a live view.
inline PanelConfig default_panel(const Pose& head, double capture_h_fov = kDefaultCaptureHFov) {
  PanelConfig cfg;
  cfg.capture_h_fov = capture_h_fov;
  const Rotation heading = detail::heading_of(head);
  cfg.panel.pose.position = head.position + heading.rotate(cfg.placement_offset);
  cfg.panel.pose.orientation = heading * Rotation::axis_angle(kRight, cfg.inclination);
  cfg.head_pose_at_capture = head;
  return cfg;
}

/// Pose `distance` from the head, `depression_deg` below eye level, facing it.
inline Pose facing_panel_pose(const Pose& head, double distance, double depression_deg) {
  const Rotation orient = detail::heading_of(head) * Rotation::axis_angle(kRight, depression_deg);
  return {head.position + orient.forward() * distance, orient};
}

inline PanelConfig configure(const PanelConfig& cfg, const ConfigCommand& command, const Pose& head) {
  PanelConfig out = cfg;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, cmd::Reset>) {
          out = default_panel(head, cfg.capture_h_fov);
        } else if constexpr (std::is_same_v<T, cmd::Grab>) {
          if (!out.panel.view) {
            CapturedView view;
            view.origin = head.position;
            view.orientation = head.orientation;
            view.h_fov = cfg.capture_h_fov;
            view.v_fov = vfov_for_aspect(cfg.capture_h_fov);
            view.validate();
            out.panel.view = view;
            out.head_pose_at_capture = head;
          }
          out.panel.pose = c.target_pose;
          out.panel.state = PanelState::Configured;
        } else {
          if (!cfg.configured())
            throw std::logic_error("configure: scaling requires a configured panel");
          if constexpr (std::is_same_v<T, cmd::SetViewZoom>) {
            if (!(c.factor >= 0.1 && c.factor <= 20.0))
              throw std::invalid_argument("SetViewZoom: factor outside [0.1, 20]");
            out.panel.view->zoom *= c.factor;
            out.panel.view->validate();
          } else {
            if (!(c.factor >= 0.1 && c.factor <= 10.0))
              throw std::invalid_argument("SetPanelScale: factor outside [0.1, 10]");
            const double s = out.panel.panel_scale * c.factor;
            if (!(s >= Panel::kMinScale && s <= Panel::kMaxScale))
              throw std::invalid_argument("SetPanelScale: panel scale leaves [0.1, 10]");
            out.panel.panel_scale = s;
          }
        }
      },
      command);
  return out;
}

// ---------------------------------------------------------------------------
// Cursor coupling

using SelectionInput = std::variant<Ray, Vec3>;  // hand ray, or index fingertip

inline void require_configured(TechniqueKind kind, const PanelConfig& cfg) {
  if (is_viewfinder(kind) && !cfg.configured())
    throw std::logic_error("viewfinder technique used with an unconfigured panel");
}

/// Panel coordinates of the proxy of a world point, empty if outside the frustum.
inline std::optional<PanelUV> proxy_uv(const PanelConfig& cfg, const Vec3& world) {
  if (!cfg.panel.view) return std::nullopt;
  const auto uv = cfg.panel.view->project(world);
  if (!uv || !uv_inside(uv->first, uv->second)) return std::nullopt;
  return PanelUV{uv->first, uv->second};
}

inline std::optional<Vec3> selection_point(TechniqueKind kind, const PanelConfig& cfg,
                                           const SelectionInput& input, const Plane& target_plane) {
  if (kind == TechniqueKind::Raycasting) {
    const auto* ray = std::get_if<Ray>(&input);
    if (!ray) throw std::invalid_argument("Raycasting expects a hand ray");
    return ray_plane_intersect(*ray, target_plane);
  }
  require_configured(kind, cfg);
  std::optional<PanelUV> uv;
  if (kind == TechniqueKind::ViewfinderRay) {
    const auto* ray = std::get_if<Ray>(&input);
    if (!ray) throw std::invalid_argument("ViewfinderRay expects a hand ray");
    uv = ray_panel_uv(*ray, cfg.panel);
  } else {
    const auto* tip = std::get_if<Vec3>(&input);
    if (!tip) throw std::invalid_argument("ViewfinderTouch expects a fingertip position");
    const TouchUV t = touch_panel_uv(*tip, cfg.panel);
    // Only a penetrating, in-bounds touch is a selection event.
    if (t.triggers() && t.in_bounds) uv = PanelUV{t.u, t.v};
  }
  if (!uv) return std::nullopt;
  return ray_plane_intersect(uv_to_world_ray(cfg.panel.view, uv->u, uv->v), target_plane);
}

// ---------------------------------------------------------------------------
// Derived measures

/// Physical width on the panel of a target's proxy (horizontal diameter).
inline double proxy_width(const PanelConfig& cfg, double target_width, const Vec3& target_center) {
  if (!cfg.panel.view) throw std::logic_error("proxy_width: live view");
  const Vec3 half = cfg.panel.view->orientation.right() * (target_width / 2.0);
  const auto a = proxy_uv(cfg, target_center - half);
  const auto b = proxy_uv(cfg, target_center + half);
  if (!a || !b) throw std::domain_error("target lies outside the captured frustum");
  return distance(cfg.panel.point_at(a->u, a->v), cfg.panel.point_at(b->u, b->v));
}

inline double adjusted_visual_angle(TechniqueKind kind, const PanelConfig& cfg, double target_width,
                                    const Vec3& target_center, const Pose& head) {
  if (kind == TechniqueKind::Raycasting)
    return visual_angle(target_width, distance(head.position, target_center));
  require_configured(kind, cfg);
  return visual_angle(proxy_width(cfg, target_width, target_center),
                      distance(head.position, cfg.panel.pose.position));
}

inline double actual_target_depth(TechniqueKind kind, const PanelConfig& cfg, const Pose& head,
                                  const TargetLayout& layout) {
  if (kind == TechniqueKind::Raycasting) return distance(head.position, layout.center());
  return distance(head.position, cfg.panel.pose.position);
}

/// Largest view zoom that keeps every target of `layout` inside the frustum
/// with a relative margin (1.05 = 5%). `view` is evaluated at its own zoom.
inline double max_feasible_zoom(const CapturedView& view, const TargetLayout& layout,
                                double margin = 1.05) {
  double extent = 0.0;
  const Vec3 r = view.orientation.right() * (layout.target_width / 2.0);
  const Vec3 u = view.orientation.up() * (layout.target_width / 2.0);
  for (const Vec3& c : layout.centers) {
    for (const Vec3& p : {c + r, c - r, c + u, c - u}) {
      const auto uv = view.project(p);
      if (!uv) throw std::domain_error("max_feasible_zoom: target behind the view");
      extent = std::max({extent, std::abs(2.0 * uv->first - 1.0), std::abs(2.0 * uv->second - 1.0)});
    }
  }
  return view.zoom / (margin * extent);
}

}  // namespace vfvr
