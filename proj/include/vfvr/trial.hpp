#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "vfvr/geometry.hpp"
#include "vfvr/taskgen.hpp"

namespace vfvr {

enum class Outcome { Hit, Miss, Outlier };

constexpr std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Hit: return "hit";
    case Outcome::Miss: return "miss";
    case Outcome::Outlier: return "outlier";
  }
  return "?";
}

inline Outcome parse_outcome(std::string_view s) {
  if (s == "hit") return Outcome::Hit;
  if (s == "miss") return Outcome::Miss;
  if (s == "outlier") return Outcome::Outlier;
  throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

/// One selection attempt. Points are world coordinates on the target plane.
struct TrialRecord {
  int participant = 0;
  Condition condition;
  double depth = kTargetDepth;
  int sequence_idx = 0;
  int trial_idx = 0;
  int target_index = 0;
  Vec3 from_point;
  Vec3 target_center;
  Vec3 selection_point;
  double mt = 0.0;
  double hand_path = 0.0;
  double head_path = 0.0;
  Outcome outcome = Outcome::Hit;
  double actual_depth = 0.0;
  double adj_visual_angle = 0.0;
};

}  // namespace vfvr
