#pragma once

// Fixtures, random generators and independent oracles shared by the unit
// tests and the acceptance runner.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ef/fusion.hpp"
#include "ef/gesture.hpp"
#include "ef/mlp.hpp"

namespace eft {

using ef::Vec3;

// Every joint at `pelvis` except the ears and nose.
ef::Body head_body(const std::string& id, const Vec3& ear_left, const Vec3& ear_right, const Vec3& nose,
                   const Vec3& pelvis = Vec3(0, 0.45, 0));

// Head centered at `center` looking along `dir`.
ef::Body looking_body(const std::string& id, const Vec3& center, const Vec3& dir);

// Index straight along `dir` from the wrist, other fingers folded toward
// `down` (must not be parallel to dir).
ef::HandLandmarks pointing_hand(const std::string& body, const Vec3& wrist, const Vec3& dir,
                                const Vec3& down = Vec3(0, -1, 0));
// All five digits straight.
ef::HandLandmarks open_palm(const std::string& body, const Vec3& wrist, const Vec3& dir,
                            const Vec3& down = Vec3(0, -1, 0));
// Pointing hand whose index is bent by `bend` radians at the PIP joint.
ef::HandLandmarks bent_index_hand(const std::string& body, const Vec3& wrist, const Vec3& dir, double bend,
                                  const Vec3& down = Vec3(0, -1, 0));

// Index segment lengths of the fixtures: wrist-MCP, MCP-PIP, PIP-DIP, DIP-tip.
inline constexpr double kIndexSegments[4] = {0.09, 0.04, 0.025, 0.02};

// `n` samples `dt` apart, the hand translated by velocity * t.
ef::HandTrackWindow hand_window(const ef::HandLandmarks& hand, double t0, int n, double dt,
                                const Vec3& velocity = Vec3::Zero());

ef::HandLandmarks translated(ef::HandLandmarks hand, const Vec3& offset);

Vec3 random_unit(std::mt19937_64& rng);

// Random cone and a box placed near it so that roughly half the pairs touch.
ef::Coned random_cone(std::mt19937_64& rng);
ef::Aabbd random_box_near(const ef::Coned& cone, std::mt19937_64& rng);

// True when some point of an n^3 grid over the box (faces included) lies in
// the cone.
bool grid_hits_cone(const ef::Coned& cone, const ef::Aabbd& box, int n = 20);

// Distance from p to the cone's boundary surface sampled on a dense grid
// (lateral surface plus far cap). Upper bound on the true distance, within
// the grid spacing of it.
double sampled_distance_to_cone(const ef::Coned& cone, const Vec3& p, int n = 400);

// ---- dominated discussion --------------------------------------------------

struct DominatedTruth {
  std::string speaker;
  double start = 0.0;
  double crossing = 0.0;
  double end = 0.0;
};

// Brute-force turn tracking on a fixed time grid. Interval endpoints,
// threshold and gap tolerance must be multiples of `step`.
std::vector<DominatedTruth> dominated_scan(const std::vector<ef::SpeechInterval>& speech, const ef::FusionConfig& cfg,
                                           double step = 0.01);

// Per-speaker alternating silence/speech on a 10 ms grid, with long runs
// mixed in so that thresholds get crossed.
std::vector<ef::SpeechInterval> random_speech(std::mt19937_64& rng, int speakers, double duration,
                                              double long_run);

// ---- whole sessions --------------------------------------------------------

struct RandomSession {
  ef::FusionConfig cfg;
  std::vector<ef::FrameObservations> frames;
};

// Jittered frame times, flickering gaze and posture, speech runs and
// pointing episodes for two or three participants.
RandomSession random_session(std::uint64_t seed);

// Runs the incremental engine over the frames and returns its events after
// finish, canonicalized.
std::vector<ef::EngagementEvent> run_engine(const RandomSession& session);

// Batch detectors over the offline timelines.
std::vector<ef::EngagementEvent> run_batch(const RandomSession& session);

std::string describe(const ef::EngagementEvent& e);

// ---- MLP gradients ----------------------------------------------------------

struct GradientCheck {
  double worst = 0.0;  // largest relative error seen
  int checked = 0;
};

// Relative errors below this magnitude floor are measured absolutely.
inline constexpr double kGradientFloor = 1e-6;

// Random model and batch from `seed`; compares backpropagated gradients with
// central differences of step h on `samples` random parameters.
GradientCheck gradient_check(std::uint64_t seed, int samples = 20, double h = 1e-5);

// ---- files -------------------------------------------------------------------

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace eft
