#include "ef/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace ef {
namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "PELVIS",         "SPINE_NAVEL",   "SPINE_CHEST", "NECK",       "CLAVICLE_LEFT", "SHOULDER_LEFT",
    "ELBOW_LEFT",     "WRIST_LEFT",    "HAND_LEFT",   "HANDTIP_LEFT", "THUMB_LEFT",  "CLAVICLE_RIGHT",
    "SHOULDER_RIGHT", "ELBOW_RIGHT",   "WRIST_RIGHT", "HAND_RIGHT", "HANDTIP_RIGHT", "THUMB_RIGHT",
    "HIP_LEFT",       "KNEE_LEFT",     "ANKLE_LEFT",  "FOOT_LEFT",  "HIP_RIGHT",     "KNEE_RIGHT",
    "ANKLE_RIGHT",    "FOOT_RIGHT",    "HEAD",        "NOSE",       "EYE_LEFT",      "EAR_LEFT",
    "EYE_RIGHT",      "EAR_RIGHT",
};

}  // namespace

std::string_view joint_name(JointId joint) noexcept {
  return kJointNames[static_cast<std::size_t>(joint)];
}

std::optional<JointId> joint_from_name(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kJointNames.size(); ++i) {
    if (kJointNames[i] == name) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

std::string_view hand_side_code(HandSide side) noexcept { return side == HandSide::Left ? "L" : "R"; }

void ObjectRegistry::add(TaskObject object) {
  if (!object.aabb.valid()) {
    throw Error(Errc::InvalidAabb, "object '" + object.id + "' has min > max or an empty box");
  }
  auto it = std::lower_bound(objects_.begin(), objects_.end(), object.id,
                             [](const TaskObject& o, const std::string& id) { return o.id < id; });
  if (it != objects_.end() && it->id == object.id) {
    throw Error(Errc::DuplicateObjectId, "object id '" + object.id + "' appears twice");
  }
  objects_.insert(it, std::move(object));
}

const TaskObject* ObjectRegistry::find(std::string_view id) const {
  auto it = std::lower_bound(objects_.begin(), objects_.end(), id,
                             [](const TaskObject& o, std::string_view key) { return o.id < key; });
  return (it != objects_.end() && it->id == id) ? &*it : nullptr;
}

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::DominatedDiscussion: return "DominatedDiscussion";
    case EventKind::JointAttention: return "JointAttention";
    case EventKind::Disengagement: return "Disengagement";
    case EventKind::PointingSelection: return "PointingSelection";
  }
  return "Unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept {
  for (EventKind k : {EventKind::DominatedDiscussion, EventKind::JointAttention, EventKind::Disengagement,
                      EventKind::PointingSelection}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(Violation::Kind kind) noexcept {
  switch (kind) {
    case Violation::Kind::JointCount: return "JointCountViolation";
    case Violation::Kind::LandmarkCount: return "LandmarkCountViolation";
    case Violation::Kind::Quaternion: return "QuaternionViolation";
    case Violation::Kind::NonFinitePosition: return "NonFinitePositionViolation";
    case Violation::Kind::NonFiniteTimestamp: return "NonFiniteTimestampViolation";
    case Violation::Kind::DuplicateBodyId: return "DuplicateBodyIdViolation";
    case Violation::Kind::TooManyBodies: return "TooManyBodiesViolation";
  }
  return "UnknownViolation";
}

bool normalize_quaternion(Quat4& q) noexcept {
  const double n = q.norm();
  if (!(n > kQuatNormLow && n < kQuatNormHigh)) return false;
  q /= n;
  return true;
}

void normalize_orientations(SkeletonFrame& frame) noexcept {
  for (Body& body : frame.bodies) {
    for (Joint& joint : body.joints) normalize_quaternion(joint.orientation);
  }
}

std::vector<Violation> validate_frame(const SkeletonFrame& frame) {
  using Kind = Violation::Kind;
  std::vector<Violation> out;
  if (!std::isfinite(frame.t)) out.push_back({Kind::NonFiniteTimestamp, "", -1});
  if (frame.bodies.size() > kMaxBodies) out.push_back({Kind::TooManyBodies, "", -1});

  std::set<std::string> seen;
  for (const Body& body : frame.bodies) {
    if (!seen.insert(body.id).second) out.push_back({Kind::DuplicateBodyId, body.id, -1});
    if (body.joints.size() != kJointCount) {
      out.push_back({Kind::JointCount, body.id, static_cast<int>(body.joints.size())});
      continue;
    }
    for (std::size_t j = 0; j < body.joints.size(); ++j) {
      const Joint& joint = body.joints[j];
      if (!joint.position.allFinite()) out.push_back({Kind::NonFinitePosition, body.id, static_cast<int>(j)});
      Quat4 q = joint.orientation;
      if (!normalize_quaternion(q) || std::abs(q.norm() - 1.0) > kQuatTolerance) {
        out.push_back({Kind::Quaternion, body.id, static_cast<int>(j)});
      }
    }
  }
  for (const HandLandmarks& hand : frame.hands) {
    const std::string subject = hand.body_id + ":" + std::string(hand_side_code(hand.side));
    if (hand.points.size() != kLandmarkCount) {
      out.push_back({Kind::LandmarkCount, subject, static_cast<int>(hand.points.size())});
      continue;
    }
    for (std::size_t i = 0; i < hand.points.size(); ++i) {
      if (!hand.points[i].allFinite()) out.push_back({Kind::NonFinitePosition, subject, static_cast<int>(i)});
    }
  }
  return out;
}

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

}  // namespace ef
