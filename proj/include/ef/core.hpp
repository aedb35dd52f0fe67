#pragma once

// Shared domain types: skeleton frames, hand landmarks, speech activity,
// task objects and engagement events.
//
// World frame is the capture device frame: x right, y up, z from the camera
// toward the participants. Positions are meters. Orientations are unit
// quaternions stored as (w, x, y, z).

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ef/geometry.hpp"

namespace ef {

using Quat4 = Eigen::Vector4d;  // (w, x, y, z)

// Body-tracking joint order. The numeric value is the index into
// Body::joints and the slot order of posture feature vectors.
enum class JointId : std::uint8_t {
  Pelvis = 0,
  SpineNavel,
  SpineChest,
  Neck,
  ClavicleLeft,
  ShoulderLeft,
  ElbowLeft,
  WristLeft,
  HandLeft,
  HandTipLeft,
  ThumbLeft,
  ClavicleRight,
  ShoulderRight,
  ElbowRight,
  WristRight,
  HandRight,
  HandTipRight,
  ThumbRight,
  HipLeft,
  KneeLeft,
  AnkleLeft,
  FootLeft,
  HipRight,
  KneeRight,
  AnkleRight,
  FootRight,
  Head,
  Nose,
  EyeLeft,
  EarLeft,
  EyeRight,
  EarRight,
};

inline constexpr std::size_t kJointCount = 32;

std::string_view joint_name(JointId joint) noexcept;
std::optional<JointId> joint_from_name(std::string_view name) noexcept;

struct Joint {
  Vec3 position = Vec3::Zero();
  Quat4 orientation = Quat4(1, 0, 0, 0);
};

struct Body {
  std::string id;
  // Always kJointCount entries once ingested; validate_frame reports otherwise.
  std::vector<Joint> joints = std::vector<Joint>(kJointCount);

  const Joint& joint(JointId j) const { return joints.at(static_cast<std::size_t>(j)); }
  Joint& joint(JointId j) { return joints.at(static_cast<std::size_t>(j)); }
  const Vec3& position(JointId j) const { return joint(j).position; }
};

enum class HandSide { Left, Right };

std::string_view hand_side_code(HandSide side) noexcept;  // "L" / "R"

// 21-point hand landmark layout of the common hand-tracking toolkits.
enum class HandLandmark : std::uint8_t {
  Wrist = 0,
  ThumbCmc,
  ThumbMcp,
  ThumbIp,
  ThumbTip,
  IndexMcp,
  IndexPip,
  IndexDip,
  IndexTip,
  MiddleMcp,
  MiddlePip,
  MiddleDip,
  MiddleTip,
  RingMcp,
  RingPip,
  RingDip,
  RingTip,
  PinkyMcp,
  PinkyPip,
  PinkyDip,
  PinkyTip,
};

inline constexpr std::size_t kLandmarkCount = 21;

struct HandLandmarks {
  std::string body_id;
  HandSide side = HandSide::Right;
  std::vector<Vec3> points = std::vector<Vec3>(kLandmarkCount, Vec3::Zero());

  const Vec3& operator[](HandLandmark l) const { return points.at(static_cast<std::size_t>(l)); }
  Vec3& operator[](HandLandmark l) { return points.at(static_cast<std::size_t>(l)); }
};

struct SpeechActivity {
  std::string speaker_id;
  bool active = false;
};

struct SkeletonFrame {
  double t = 0.0;
  std::vector<Body> bodies;
  std::vector<HandLandmarks> hands;
  std::vector<SpeechActivity> speech;
};

struct TaskObject {
  std::string id;
  std::string label;
  Aabbd aabb;
};

// Named task objects, kept sorted by id. Ids are unique and boxes valid.
class ObjectRegistry {
 public:
  ObjectRegistry() = default;

  void add(TaskObject object);
  const TaskObject* find(std::string_view id) const;

  auto begin() const { return objects_.begin(); }
  auto end() const { return objects_.end(); }
  std::size_t size() const { return objects_.size(); }
  bool empty() const { return objects_.empty(); }

 private:
  std::vector<TaskObject> objects_;
};

enum class EventKind { DominatedDiscussion, JointAttention, Disengagement, PointingSelection };

std::string_view to_string(EventKind kind) noexcept;
std::optional<EventKind> event_kind_from_string(std::string_view name) noexcept;

struct EngagementEvent {
  std::uint64_t id = 0;
  EventKind kind = EventKind::DominatedDiscussion;
  double t_start = 0.0;
  std::optional<double> t_end;
  std::vector<std::string> participants;
  std::optional<std::string> target;
  std::map<std::string, std::string> metadata;

  bool open() const { return !t_end.has_value(); }
};

struct Violation {
  enum class Kind {
    JointCount,
    LandmarkCount,
    Quaternion,
    NonFinitePosition,
    NonFiniteTimestamp,
    DuplicateBodyId,
    TooManyBodies,
  };
  Kind kind;
  std::string subject;  // body id, or "body:hand" for landmarks
  int index = -1;       // joint / landmark index when relevant
};

std::string_view to_string(Violation::Kind kind) noexcept;

inline constexpr std::size_t kMaxBodies = 3;
inline constexpr double kQuatNormLow = 0.5;
inline constexpr double kQuatNormHigh = 2.0;
inline constexpr double kQuatTolerance = 1e-6;

// Renormalizes a quaternion whose norm lies in (0.5, 2.0). Returns false and
// leaves q untouched otherwise.
bool normalize_quaternion(Quat4& q) noexcept;

// Applies normalize_quaternion to every joint of every body.
void normalize_orientations(SkeletonFrame& frame) noexcept;

// All invariant violations of the frame; empty means valid. Quaternions are
// judged after the normalization attempt.
std::vector<Violation> validate_frame(const SkeletonFrame& frame);

// Formats a double with the shortest representation that round-trips.
std::string format_number(double value);

}  // namespace ef
