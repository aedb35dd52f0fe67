#pragma once

// Per-frame gaze: a ray from the midpoint of the ears through the nose,
// widened to a cone and resolved against task objects and other heads.

#include <span>
#include <string>

#include "ef/core.hpp"

namespace ef {

struct GazeConfig {
  double half_angle = deg_to_rad(10.0);
  double range = 2.5;
  double head_radius = 0.12;  // sphere proxy for another participant's head
};

struct GazeTarget {
  enum class Kind { None, Object, Participant };

  Kind kind = Kind::None;
  std::string id;

  static GazeTarget none() { return {}; }
  static GazeTarget object(std::string id) { return {Kind::Object, std::move(id)}; }
  static GazeTarget participant(std::string id) { return {Kind::Participant, std::move(id)}; }

  bool is_none() const { return kind == Kind::None; }
  friend bool operator==(const GazeTarget&, const GazeTarget&) = default;
  friend auto operator<=>(const GazeTarget&, const GazeTarget&) = default;
};

// "object:<id>", "participant:<id>" or "none".
std::string to_string(const GazeTarget& target);

struct GazeSample {
  std::string body_id;
  UnitRayd ray;
  GazeTarget target;
};

inline constexpr double kDegenerateHeadTolerance = 1e-6;

// Ear midpoint; the representative point of a head.
Vec3 head_center(const Body& body);

// Throws DegenerateHead when the nose sits on the ear midpoint.
UnitRayd gaze_ray(const Body& body);

Coned gaze_cone(const Body& body, const GazeConfig& cfg);

// Nearest-to-axis candidate among the objects selected by the gaze cone and
// the heads of `others` touching it. Ties go to the closer candidate, then to
// the smaller id. Bodies in `others` sharing the gazer's id are ignored.
GazeTarget gaze_target(const Body& body, const ObjectRegistry& registry, std::span<const Body> others,
                       const GazeConfig& cfg);

}  // namespace ef
