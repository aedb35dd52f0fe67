#include "ef/gaze.hpp"

#include <tuple>
#include <vector>

namespace ef {

std::string to_string(const GazeTarget& target) {
  switch (target.kind) {
    case GazeTarget::Kind::Object: return "object:" + target.id;
    case GazeTarget::Kind::Participant: return "participant:" + target.id;
    case GazeTarget::Kind::None: break;
  }
  return "none";
}

Vec3 head_center(const Body& body) {
  return (body.position(JointId::EarLeft) + body.position(JointId::EarRight)) / 2.0;
}

UnitRayd gaze_ray(const Body& body) {
  const Vec3 origin = head_center(body);
  const Vec3& nose = body.position(JointId::Nose);
  if (!origin.allFinite() || !nose.allFinite()) {
    throw Error(Errc::DegenerateHead, "non-finite head joints on body '" + body.id + "'");
  }
  if ((nose - origin).norm() < kDegenerateHeadTolerance) {
    throw Error(Errc::DegenerateHead, "nose coincides with ear midpoint on body '" + body.id + "'");
  }
  return ray_from_points(origin, nose);
}

Coned gaze_cone(const Body& body, const GazeConfig& cfg) {
  return cone_from_ray(gaze_ray(body), cfg.half_angle, cfg.range);
}

GazeTarget gaze_target(const Body& body, const ObjectRegistry& registry, std::span<const Body> others,
                       const GazeConfig& cfg) {
  const Coned cone = gaze_cone(body, cfg);

  // (angle, distance, id, target)
  std::vector<std::tuple<double, double, std::string, GazeTarget>> candidates;
  for (const std::string& id : select_objects(cone, registry)) {
    const Vec3 center = registry.find(id)->aabb.center();
    candidates.emplace_back(angle_from_axis(cone, center), (center - cone.apex).norm(), id,
                            GazeTarget::object(id));
  }
  for (const Body& other : others) {
    if (other.id == body.id) continue;
    const Vec3 center = head_center(other);
    if (!center.allFinite() || !sphere_cone_intersect(cone, center, cfg.head_radius)) continue;
    candidates.emplace_back(angle_from_axis(cone, center), (center - cone.apex).norm(), other.id,
                            GazeTarget::participant(other.id));
  }
  if (candidates.empty()) return GazeTarget::none();
  return std::get<3>(*std::min_element(candidates.begin(), candidates.end()));
}

}  // namespace ef
