#include "ef/simulator.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ef {

namespace {

using J = JointId;
using L = HandLandmark;

// Seated pose in the participant's own frame: (right, up, forward) meters
// from the pelvis.
struct PoseJoint {
  J id;
  Vec3 offset;
  bool upper;  // pitches with the torso
};

const std::array<PoseJoint, kJointCount>& seated_pose() {
  static const std::array<PoseJoint, kJointCount> pose = {{
      {J::Pelvis, {0, 0, 0}, false},
      {J::SpineNavel, {0, 0.20, 0}, true},
      {J::SpineChest, {0, 0.38, 0}, true},
      {J::Neck, {0, 0.52, 0}, true},
      {J::ClavicleLeft, {-0.04, 0.48, 0}, true},
      {J::ShoulderLeft, {-0.18, 0.46, 0}, true},
      {J::ElbowLeft, {-0.20, 0.20, 0.05}, true},
      {J::WristLeft, {-0.15, 0.22, 0.30}, true},
      {J::HandLeft, {-0.14, 0.22, 0.38}, true},
      {J::HandTipLeft, {-0.13, 0.22, 0.44}, true},
      {J::ThumbLeft, {-0.10, 0.23, 0.37}, true},
      {J::ClavicleRight, {0.04, 0.48, 0}, true},
      {J::ShoulderRight, {0.18, 0.46, 0}, true},
      {J::ElbowRight, {0.20, 0.20, 0.05}, true},
      {J::WristRight, {0.15, 0.22, 0.30}, true},
      {J::HandRight, {0.14, 0.22, 0.38}, true},
      {J::HandTipRight, {0.13, 0.22, 0.44}, true},
      {J::ThumbRight, {0.10, 0.23, 0.37}, true},
      {J::HipLeft, {-0.10, 0, 0}, false},
      {J::KneeLeft, {-0.10, 0, 0.45}, false},
      {J::AnkleLeft, {-0.10, -0.45, 0.45}, false},
      {J::FootLeft, {-0.10, -0.47, 0.57}, false},
      {J::HipRight, {0.10, 0, 0}, false},
      {J::KneeRight, {0.10, 0, 0.45}, false},
      {J::AnkleRight, {0.10, -0.45, 0.45}, false},
      {J::FootRight, {0.10, -0.47, 0.57}, false},
      {J::Head, {0, 0.62, 0.02}, true},
      {J::Nose, {0, 0, 0}, true},  // placed from the look direction
      {J::EyeLeft, {0, 0, 0}, true},
      {J::EarLeft, {-0.075, 0.65, 0}, true},
      {J::EyeRight, {0, 0, 0}, true},
      {J::EarRight, {0.075, 0.65, 0}, true},
  }};
  return pose;
}

constexpr double kHeadHeight = 0.65;  // ear midpoint above the pelvis

bool is_head_joint(J j) {
  return j == J::Head || j == J::Nose || j == J::EyeLeft || j == J::EyeRight || j == J::EarLeft || j == J::EarRight;
}

// The participant's frame: right, up, forward.
struct Frame3 {
  Vec3 right, up, forward;
};

Frame3 seat_frame(Seat seat) {
  Vec3 forward = table_center() - seat_pelvis(seat);
  forward.y() = 0.0;
  forward.normalize();
  const Vec3 up = Vec3::UnitY();
  return {up.cross(forward), up, forward};
}

double lean_pitch(PostureLabel lean) {
  switch (lean) {
    case PostureLabel::LeanIn: return deg_to_rad(kLeanPitchDeg);
    case PostureLabel::LeanOut: return -deg_to_rad(kLeanPitchDeg);
    case PostureLabel::Neutral: return 0.0;
  }
  return 0.0;
}

// Rotation tipping `up` toward `forward` by the lean pitch.
Eigen::Matrix3d pitch_rotation(const Frame3& f, PostureLabel lean) {
  return Eigen::AngleAxisd(lean_pitch(lean), f.up.cross(f.forward)).toRotationMatrix();
}

Vec3 to_world(const Frame3& f, const Vec3& local) {
  return local.x() * f.right + local.y() * f.up + local.z() * f.forward;
}

Quat4 to_quat4(const Eigen::Matrix3d& m) {
  const Eigen::Quaterniond q(m);
  return {q.w(), q.x(), q.y(), q.z()};
}

Vec3 upper_point(Seat seat, PostureLabel lean, const Vec3& local) {
  const Frame3 f = seat_frame(seat);
  return seat_pelvis(seat) + pitch_rotation(f, lean) * to_world(f, local);
}

Vec3 shoulder(Seat seat, PostureLabel lean, HandSide side) {
  const double x = side == HandSide::Right ? 0.18 : -0.18;
  return upper_point(seat, lean, {x, 0.46, 0});
}

Vec3 gaussian3(std::mt19937_64& rng, double sigma) {
  if (!(sigma > 0.0)) return Vec3::Zero();
  std::normal_distribution<double> n(0.0, sigma);
  const double x = n(rng), y = n(rng), z = n(rng);
  return {x, y, z};
}

// The pointing hand in the local (aim, palm-down, side) frame.
struct HandBasis {
  Vec3 aim, down, side;
};

HandBasis hand_basis(const Vec3& aim) {
  Vec3 down = -Vec3::UnitY() + aim * aim.y();
  if (down.norm() < 1e-6) down = Vec3::UnitZ() - aim * aim.z();
  down.normalize();
  return {aim, down, aim.cross(down)};
}

std::array<Vec3, kLandmarkCount> point_hand_shape(const Vec3& wrist, const HandBasis& b) {
  std::array<Vec3, kLandmarkCount> p;
  auto at = [&p](L l) -> Vec3& { return p[static_cast<std::size_t>(l)]; };
  at(L::Wrist) = wrist;

  at(L::ThumbCmc) = wrist + 0.025 * b.aim + 0.025 * b.side;
  at(L::ThumbMcp) = at(L::ThumbCmc) + 0.03 * b.aim + 0.015 * b.side;
  at(L::ThumbIp) = at(L::ThumbMcp) + 0.025 * b.down;
  at(L::ThumbTip) = at(L::ThumbIp) - 0.02 * b.side + 0.005 * b.aim;

  at(L::IndexMcp) = wrist + 0.09 * b.aim;
  at(L::IndexPip) = at(L::IndexMcp) + 0.045 * b.aim;
  at(L::IndexDip) = at(L::IndexPip) + 0.025 * b.aim;
  at(L::IndexTip) = at(L::IndexDip) + 0.022 * b.aim;

  const std::array<std::pair<L, double>, 3> folded = {
      {{L::MiddleMcp, -0.022}, {L::RingMcp, -0.042}, {L::PinkyMcp, -0.06}}};
  for (const auto& [mcp, spread] : folded) {
    const auto base = static_cast<std::size_t>(mcp);
    p[base] = wrist + 0.085 * b.aim + spread * b.side;
    p[base + 1] = p[base] + 0.035 * b.down;
    p[base + 2] = p[base + 1] - 0.025 * b.aim;
    p[base + 3] = p[base + 2] - 0.02 * b.aim - 0.01 * b.down;
  }
  return p;
}

constexpr double kWristReach = 0.40;

}  // namespace

Vec3 seat_pelvis(Seat seat) {
  switch (seat) {
    case Seat::Left: return {-0.7, 0.45, 2.45};
    case Seat::Middle: return {0.0, 0.45, 2.7};
    case Seat::Right: return {0.7, 0.45, 2.45};
  }
  return Vec3::Zero();
}

Vec3 table_center() { return {0.0, 0.75, 1.9}; }

Vec3 canonical_head(Seat seat, PostureLabel lean) { return upper_point(seat, lean, {0, kHeadHeight, 0}); }

Vec3 idle_look(Seat seat) {
  const Frame3 f = seat_frame(seat);
  return (f.up - 0.25 * f.forward).normalized();
}

Body synth_body(const std::string& id, Seat seat, PostureLabel lean, const Vec3& look_dir, double noise_sigma,
                std::mt19937_64& rng, const std::optional<Vec3>& point_at) {
  const Frame3 f = seat_frame(seat);
  const Vec3 pelvis = seat_pelvis(seat);
  const Eigen::Matrix3d pitch = pitch_rotation(f, lean);
  Eigen::Matrix3d basis;
  basis << f.right, f.up, f.forward;
  const Quat4 lower_q = to_quat4(basis);
  const Quat4 upper_q = to_quat4(pitch * basis);

  Body body;
  body.id = id;
  for (const PoseJoint& pj : seated_pose()) {
    Joint& joint = body.joint(pj.id);
    const Vec3 local = to_world(f, pj.offset);
    joint.position = pelvis + (pj.upper ? Vec3(pitch * local) : local);
    joint.orientation = pj.upper ? upper_q : lower_q;
  }

  const Vec3 look = look_dir.normalized();
  const Vec3 head = canonical_head(seat, lean);
  body.joint(J::Nose).position = head + 0.10 * look;
  body.joint(J::EyeLeft).position = head + 0.07 * look - 0.032 * f.right;
  body.joint(J::EyeRight).position = head + 0.07 * look + 0.032 * f.right;

  if (point_at) {
    const Vec3 s = shoulder(seat, lean, HandSide::Right);
    const Vec3 aim = (*point_at - s).normalized();
    const auto hand = point_hand_shape(s + kWristReach * aim, hand_basis(aim));
    body.joint(J::ElbowRight).position = s + 0.22 * aim;
    body.joint(J::WristRight).position = hand[static_cast<std::size_t>(L::Wrist)];
    body.joint(J::HandRight).position = hand[static_cast<std::size_t>(L::Wrist)] + 0.07 * aim;
    body.joint(J::HandTipRight).position = hand[static_cast<std::size_t>(L::IndexTip)];
    body.joint(J::ThumbRight).position = hand[static_cast<std::size_t>(L::ThumbTip)];
  }

  const Vec3 head_jitter = gaussian3(rng, noise_sigma);
  for (std::size_t j = 0; j < kJointCount; ++j) {
    const auto id_j = static_cast<J>(j);
    body.joints[j].position += is_head_joint(id_j) ? head_jitter : gaussian3(rng, noise_sigma);
  }
  return body;
}

HandLandmarks synth_point_hand(const std::string& id, Seat seat, PostureLabel lean, HandSide side,
                               const Vec3& target, double noise_sigma, std::mt19937_64& rng) {
  const Vec3 s = shoulder(seat, lean, side);
  const Vec3 aim = (target - s).normalized();
  const auto shape = point_hand_shape(s + kWristReach * aim, hand_basis(aim));
  HandLandmarks hand;
  hand.body_id = id;
  hand.side = side;
  for (std::size_t i = 0; i < kLandmarkCount; ++i) hand.points[i] = shape[i] + gaussian3(rng, noise_sigma);
  return hand;
}

// ---- scripts ----------------------------------------------------------------

void ScenarioScript::validate() const {
  auto fail = [this](const std::string& what) {
    throw Error(Errc::InvalidScript, "scenario '" + name + "': " + what);
  };
  if (!(duration > 0.0) || !std::isfinite(duration)) fail("duration must be positive");
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) fail("frame rate must be positive");
  if (!(noise_sigma >= 0.0)) fail("noise sigma must be non-negative");
  const std::set<std::string> people(seats.begin(), seats.end());
  if (people.size() != seats.size()) fail("seat ids must be distinct");

  auto check = [&](const std::string& who, double t0, double t1, const char* kind) {
    if (!people.contains(who)) fail(std::string(kind) + " names unknown participant '" + who + "'");
    if (!(t0 >= 0.0 && t0 < t1 && t1 <= duration)) fail(std::string(kind) + " interval outside [0, duration]");
  };
  for (const Directive& d : directives) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Speak>) {
            check(x.speaker, x.t0, x.t1, "Speak");
          } else if constexpr (std::is_same_v<T, LookAt>) {
            check(x.participant, x.t0, x.t1, "LookAt");
            if (x.target.kind == GazeTarget::Kind::Participant &&
                (!people.contains(x.target.id) || x.target.id == x.participant)) {
              fail("LookAt targets an invalid participant '" + x.target.id + "'");
            }
            if (x.target.kind == GazeTarget::Kind::Object && objects.find(x.target.id) == nullptr) {
              fail("LookAt targets unknown object '" + x.target.id + "'");
            }
          } else if constexpr (std::is_same_v<T, Lean>) {
            check(x.participant, x.t0, x.t1, "Lean");
          } else {
            check(x.participant, x.t0, x.t1, "PointAt");
            if (objects.find(x.object_id) == nullptr) fail("PointAt targets unknown object '" + x.object_id + "'");
          }
        },
        d);
  }

  // One directive of each kind per participant at any instant.
  auto overlapping = [&](auto pick) {
    std::map<std::string, std::vector<std::pair<double, double>>> spans;
    for (const Directive& d : directives) pick(d, spans);
    for (auto& [who, list] : spans) {
      std::sort(list.begin(), list.end());
      for (std::size_t i = 1; i < list.size(); ++i)
        if (list[i].first < list[i - 1].second) return who;
    }
    return std::string();
  };
  auto collect = [](auto tag) {
    return [](const Directive& d, auto& spans) {
      if (auto* x = std::get_if<decltype(tag)>(&d)) {
        if constexpr (std::is_same_v<decltype(tag), Speak>) {
          spans[x->speaker].emplace_back(x->t0, x->t1);
        } else {
          spans[x->participant].emplace_back(x->t0, x->t1);
        }
      }
    };
  };
  for (const auto& who : {overlapping(collect(Speak{})), overlapping(collect(LookAt{})), overlapping(collect(Lean{})),
                          overlapping(collect(PointAt{}))}) {
    if (!who.empty()) fail("overlapping directives of one kind for '" + who + "'");
  }
}

namespace {

struct ParticipantState {
  PostureLabel lean = PostureLabel::Neutral;
  std::optional<GazeTarget> look;
  std::optional<std::pair<std::string, HandSide>> point;
  bool speaking = false;
};

bool active_at(double t0, double t1, double t) { return t0 <= t && t < t1; }

std::map<std::string, ParticipantState> states_at(const ScenarioScript& s, double t) {
  std::map<std::string, ParticipantState> out;
  for (const auto& id : s.seats) out[id];
  for (const Directive& d : s.directives) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if (!active_at(x.t0, x.t1, t)) return;
          if constexpr (std::is_same_v<T, Speak>) {
            out[x.speaker].speaking = true;
          } else if constexpr (std::is_same_v<T, LookAt>) {
            out[x.participant].look = x.target;
          } else if constexpr (std::is_same_v<T, Lean>) {
            out[x.participant].lean = x.lean;
          } else {
            out[x.participant].point = std::pair{x.object_id, x.side};
          }
        },
        d);
  }
  return out;
}

// Periods where at least `min_count` of the given spans overlap, with the
// union of the participants involved.
std::vector<std::tuple<double, double, std::set<std::string>>> shared_periods(
    const std::vector<std::tuple<std::string, double, double>>& spans, int min_count) {
  std::map<double, std::vector<std::pair<std::string, int>>> changes;
  for (const auto& [who, t0, t1] : spans) {
    changes[t0].emplace_back(who, +1);
    changes[t1].emplace_back(who, -1);
  }
  std::vector<std::tuple<double, double, std::set<std::string>>> out;
  std::map<std::string, int> count;
  std::optional<double> start;
  std::set<std::string> members;
  for (const auto& [t, list] : changes) {
    for (const auto& [who, delta] : list) count[who] += delta;
    std::set<std::string> now;
    for (const auto& [who, n] : count)
      if (n > 0) now.insert(who);
    if (static_cast<int>(now.size()) >= min_count) {
      if (!start) {
        start = t;
        members.clear();
      }
      members.insert(now.begin(), now.end());
    } else if (start) {
      out.emplace_back(*start, t, members);
      start.reset();
    }
  }
  return out;
}

std::vector<EngagementEvent> script_truth(const ScenarioScript& s, const FusionConfig& cfg) {
  std::vector<EngagementEvent> truth;

  std::map<GazeTarget, std::vector<std::tuple<std::string, double, double>>> looks;
  std::map<std::string, std::vector<std::pair<double, double>>> lean_out, looking;
  for (const Directive& d : s.directives) {
    if (const auto* x = std::get_if<Speak>(&d); x && x->t1 - x->t0 >= cfg.dominated_threshold) {
      EngagementEvent e;
      e.kind = EventKind::DominatedDiscussion;
      e.t_start = x->t0;
      e.t_end = x->t1;
      e.participants = {x->speaker};
      e.metadata["crossing"] = format_number(x->t0 + cfg.dominated_threshold);
      truth.push_back(std::move(e));
    } else if (const auto* x = std::get_if<LookAt>(&d)) {
      looks[x->target].emplace_back(x->participant, x->t0, x->t1);
      looking[x->participant].emplace_back(x->t0, x->t1);
    } else if (const auto* x = std::get_if<Lean>(&d); x && x->lean == PostureLabel::LeanOut) {
      lean_out[x->participant].emplace_back(x->t0, x->t1);
    } else if (const auto* x = std::get_if<PointAt>(&d)) {
      EngagementEvent e;
      e.kind = EventKind::PointingSelection;
      e.t_start = (x->t0 + x->t1) / 2.0;
      e.t_end = e.t_start;
      e.participants = {x->participant};
      e.target = x->object_id;
      e.metadata["hand"] = std::string(hand_side_code(x->side));
      truth.push_back(std::move(e));
    }
  }

  for (const auto& [target, spans] : looks) {
    if (target.is_none()) continue;
    for (const auto& [t0, t1, members] : shared_periods(spans, cfg.jva_min_participants)) {
      if (t1 - t0 < cfg.jva_min_overlap) continue;
      EngagementEvent e;
      e.kind = EventKind::JointAttention;
      e.t_start = t0;
      e.t_end = t1;
      e.participants.assign(members.begin(), members.end());
      e.target = target.id;
      e.metadata["target_kind"] = target.kind == GazeTarget::Kind::Participant ? "participant" : "object";
      truth.push_back(std::move(e));
    }
  }

  // LeanOut spans minus the spans spent looking at something.
  for (const auto& [who, outs] : lean_out) {
    std::vector<std::pair<double, double>> busy = looking[who];
    std::sort(busy.begin(), busy.end());
    for (auto [a, b] : outs) {
      std::vector<std::pair<double, double>> free;
      double cursor = a;
      for (const auto& [c, d] : busy) {
        if (d <= cursor || c >= b) continue;
        if (c > cursor) free.emplace_back(cursor, c);
        cursor = std::max(cursor, d);
      }
      if (cursor < b) free.emplace_back(cursor, b);
      for (const auto& [f0, f1] : free) {
        if (f1 - f0 < cfg.disengage_dwell) continue;
        EngagementEvent e;
        e.kind = EventKind::Disengagement;
        e.t_start = f0;
        e.t_end = f1;
        e.participants = {who};
        truth.push_back(std::move(e));
      }
    }
  }

  canonicalize(truth);
  return truth;
}

}  // namespace

Scenario build_scenario(const ScenarioScript& script, const FusionConfig& cfg) {
  script.validate();
  cfg.validate();
  Scenario out;
  out.objects = script.objects;
  out.truth = script_truth(script, cfg);

  std::map<std::string, Seat> seat_of;
  for (std::size_t i = 0; i < kSeats.size(); ++i) seat_of[script.seats[i]] = kSeats[i];

  std::mt19937_64 rng(script.seed);
  std::map<std::string, bool> speaking;
  const auto last = static_cast<long long>(std::floor(script.duration * script.frame_rate + 1e-9));
  for (long long k = 0; k <= last; ++k) {
    const double t = static_cast<double>(k) / script.frame_rate;
    const auto states = states_at(script, t);
    SkeletonFrame frame;
    frame.t = t;
    for (std::size_t i = 0; i < kSeats.size(); ++i) {
      const std::string& id = script.seats[i];
      const Seat seat = kSeats[i];
      const ParticipantState& st = states.at(id);

      Vec3 look = idle_look(seat);
      if (st.look) {
        const Vec3 from = canonical_head(seat, st.lean);
        const Vec3 to = st.look->kind == GazeTarget::Kind::Participant
                            ? canonical_head(seat_of.at(st.look->id), states.at(st.look->id).lean)
                            : script.objects.find(st.look->id)->aabb.center();
        look = (to - from).normalized();
      }
      std::optional<Vec3> aim;
      if (st.point && st.point->second == HandSide::Right) aim = script.objects.find(st.point->first)->aabb.center();
      frame.bodies.push_back(synth_body(id, seat, st.lean, look, script.noise_sigma, rng, aim));
      if (st.point) {
        frame.hands.push_back(synth_point_hand(id, seat, st.lean, st.point->second,
                                               script.objects.find(st.point->first)->aabb.center(),
                                               script.noise_sigma, rng));
      }
      if (st.speaking != speaking[id]) {
        frame.speech.push_back({id, st.speaking});
        speaking[id] = st.speaking;
      }
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

// ---- built-in scenarios -------------------------------------------------------

ObjectRegistry weights_task_objects() {
  ObjectRegistry r;
  const double y0 = 0.75;
  const std::array<double, 5> xs = {-0.30, -0.15, 0.0, 0.15, 0.30};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double half = 0.025 + 0.005 * static_cast<double>(i);
    r.add({"block_" + std::to_string(i + 1), "block",
           {{xs[i] - half, y0, 1.75 - half}, {xs[i] + half, y0 + 2 * half, 1.75 + half}}});
  }
  r.add({"scale", "scale", {{-0.10, y0, 1.98}, {0.10, y0 + 0.08, 2.12}}});
  return r;
}

namespace {

ScenarioScript weights_task(std::uint64_t seed) {
  ScenarioScript s;
  s.name = "weights_task";
  s.duration = 34.0;
  s.seed = seed;
  s.objects = weights_task_objects();
  const auto obj = [](const char* id) { return GazeTarget::object(id); };
  const auto who = [](const char* id) { return GazeTarget::participant(id); };
  s.directives = {
      Speak{"P1", 0.5, 4.0},
      Speak{"P2", 4.5, 9.0},
      Speak{"P3", 10.0, 13.0},
      Speak{"P1", 13.5, 20.0},
      Speak{"P2", 21.0, 27.0},
      Speak{"P3", 27.5, 31.0},
      LookAt{"P1", obj("block_2"), 5.0, 9.0},
      LookAt{"P3", obj("block_2"), 6.0, 10.0},
      PointAt{"P1", "block_2", 6.0, 8.5},
      LookAt{"P1", obj("scale"), 14.0, 18.0},
      LookAt{"P2", obj("scale"), 14.5, 18.5},
      LookAt{"P3", obj("scale"), 15.0, 17.0},
      PointAt{"P1", "scale", 15.0, 17.0},
      LookAt{"P1", who("P3"), 22.0, 25.0},
      LookAt{"P2", who("P3"), 22.5, 25.5},
      LookAt{"P1", obj("block_4"), 28.0, 29.0},
      LookAt{"P2", obj("block_4"), 28.5, 30.0},
      PointAt{"P2", "block_5", 31.0, 33.0},
  };
  return s;
}

ScenarioScript dominated(std::uint64_t seed, bool engaged) {
  ScenarioScript s;
  s.name = engaged ? "dominated_engaged" : "dominated_disengaged";
  s.duration = 40.0;
  s.seed = seed;
  s.objects = weights_task_objects();
  s.directives.push_back(Speak{"P2", 1.0, 36.0});
  for (const char* listener : {"P1", "P3"}) {
    if (engaged) {
      s.directives.push_back(LookAt{listener, GazeTarget::participant("P2"), 2.0, 36.0});
      s.directives.push_back(Lean{listener, PostureLabel::LeanIn, 2.0, 36.0});
    } else {
      s.directives.push_back(Lean{listener, PostureLabel::LeanOut, 2.0, 36.0});
    }
  }
  return s;
}

}  // namespace

std::vector<std::string> scenario_names() { return {"weights_task", "dominated_engaged", "dominated_disengaged"}; }

ScenarioScript builtin_scenario(std::string_view name, std::uint64_t seed) {
  if (name == "weights_task") return weights_task(seed);
  if (name == "dominated_engaged") return dominated(seed, true);
  if (name == "dominated_disengaged") return dominated(seed, false);
  throw Error(Errc::InvalidScript, "unknown scenario '" + std::string(name) + "'");
}

PostureTrainingSet posture_training_set(int per_class, std::uint64_t seed, double noise_sigma) {
  if (per_class < 1) throw Error(Errc::InvalidScript, "posture training needs at least one sample per class");
  PostureTrainingSet out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 3);
  const ObjectRegistry objects = weights_task_objects();
  std::vector<Vec3> table_points;
  for (const TaskObject& o : objects) table_points.push_back(o.aabb.center());

  const std::array<std::string, 3> ids = {"P1", "P2", "P3"};
  const int frames = 3 * per_class;
  for (int i = 0; i < frames; ++i) {
    SkeletonFrame frame;
    frame.t = static_cast<double>(i) / 30.0;
    for (std::size_t s = 0; s < kSeats.size(); ++s) {
      const Seat seat = kSeats[s];
      const auto label = static_cast<PostureLabel>((static_cast<std::size_t>(i) + s) % kPostureClasses);
      const Vec3 head = canonical_head(seat, label);
      Vec3 look;
      switch (pick(rng)) {
        case 0: look = idle_look(seat); break;
        case 1: look = canonical_head(kSeats[(s + 1) % 3], PostureLabel::Neutral) - head; break;
        case 2: look = canonical_head(kSeats[(s + 2) % 3], PostureLabel::Neutral) - head; break;
        default: look = table_points[static_cast<std::size_t>(i) % table_points.size()] - head; break;
      }
      frame.bodies.push_back(synth_body(ids[s], seat, label, look, noise_sigma, rng));
      out.labels.push_back({frame.t, ids[s], label});
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace ef
