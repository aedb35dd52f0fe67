#pragma once

// Deterministic synthetic sessions: three seated participants around a
// table, scripted speech, gaze, lean and pointing, plus ground truth derived
// from the script alone.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ef/fusion.hpp"
#include "ef/io.hpp"

namespace ef {

struct Speak {
  std::string speaker;
  double t0 = 0.0, t1 = 0.0;
};

struct LookAt {
  std::string participant;
  GazeTarget target;
  double t0 = 0.0, t1 = 0.0;
};

struct Lean {
  std::string participant;
  PostureLabel lean = PostureLabel::Neutral;
  double t0 = 0.0, t1 = 0.0;
};

struct PointAt {
  std::string participant;
  std::string object_id;
  double t0 = 0.0, t1 = 0.0;
  HandSide side = HandSide::Right;
};

using Directive = std::variant<Speak, LookAt, Lean, PointAt>;

struct ScenarioScript {
  std::string name;
  double duration = 0.0;
  std::array<std::string, 3> seats = {"P1", "P2", "P3"};  // left, middle, right
  std::vector<Directive> directives;
  ObjectRegistry objects;
  std::uint64_t seed = 0;
  double frame_rate = 30.0;
  double noise_sigma = 0.002;

  void validate() const;  // throws InvalidScript
};

inline constexpr double kLeanPitchDeg = 12.0;

// Pelvis of a seated participant; all face the table center.
Vec3 seat_pelvis(Seat seat);
Vec3 table_center();

// Ear midpoint of the noise-free pose.
Vec3 canonical_head(Seat seat, PostureLabel lean);

// Direction used when a participant is told to look at nothing: up and away
// from the table.
Vec3 idle_look(Seat seat);

// A 32-joint seated body. The upper body is pitched about the pelvis by
// +-kLeanPitchDeg for LeanIn/LeanOut. The head joints share one rigid jitter
// so the gaze ray keeps `look_dir`; every other joint gets its own.
// `point_at` raises the right arm toward that point.
Body synth_body(const std::string& id, Seat seat, PostureLabel lean, const Vec3& look_dir, double noise_sigma,
                std::mt19937_64& rng, const std::optional<Vec3>& point_at = std::nullopt);

// Right or left hand in the pointing shape, index finger aimed at `target`
// from the matching shoulder of `body`'s noise-free pose.
HandLandmarks synth_point_hand(const std::string& id, Seat seat, PostureLabel lean, HandSide side, const Vec3& target,
                               double noise_sigma, std::mt19937_64& rng);

struct Scenario {
  std::vector<SkeletonFrame> frames;
  std::vector<EngagementEvent> truth;  // canonicalized, all closed
  ObjectRegistry objects;
};

// Ground truth follows the script: a Speak of at least dominated_threshold,
// LookAt overlaps on one target by jva_min_participants for jva_min_overlap,
// Lean Out without any LookAt for disengage_dwell, and one selection per
// PointAt at its midpoint. Scripts are expected not to stack competing
// speech on top of a long Speak.
Scenario build_scenario(const ScenarioScript& script, const FusionConfig& cfg = {});

std::vector<std::string> scenario_names();
ScenarioScript builtin_scenario(std::string_view name, std::uint64_t seed);  // throws InvalidScript

ObjectRegistry weights_task_objects();

// Seated poses with balanced lean labels: frame i gives the body in seat s
// the label (i + s) mod 3. The look direction is drawn from the ones the
// scenarios use (idle, another head, a table object).
struct PostureTrainingSet {
  std::vector<SkeletonFrame> frames;
  std::vector<PostureLabelRecord> labels;
};

PostureTrainingSet posture_training_set(int per_class, std::uint64_t seed, double noise_sigma = 0.002);

}  // namespace ef
