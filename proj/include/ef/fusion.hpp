#pragma once

// Temporal fusion of per-frame observations into engagement events.
//
// Four detectors run side by side:
//   DominatedDiscussion  one speaker holds the floor for dominated_threshold
//                        seconds of speech within a single turn
//   JointAttention       at least jva_min_participants share a gaze target
//                        for jva_min_overlap seconds
//   Disengagement        smoothed posture LeanOut while gazing at nothing for
//                        disengage_dwell seconds
//   PointingSelection    one event per pointing episode, stamped at its
//                        midpoint
//
// Every detector has a pure batch form over interval timelines and an
// incremental form driven by FusionEngine::update. Both produce the same
// events for the same session.
//
// Turn model used for DominatedDiscussion. At most one speaker holds the
// floor. A free floor goes to the first speaker to become active (earliest
// run start, then smallest id). The holder keeps it while its silences last
// at most gap_tolerance and no other speaker's continuous run inside the turn
// exceeds gap_tolerance. On release the turn ends at the holder's last active
// instant; the floor passes to the active speaker with the earliest run start,
// whose turn starts at max(run start, previous turn end). Speech accumulated
// within a turn reaching dominated_threshold opens the event, which closes at
// the turn end.

#include <array>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ef/core.hpp"
#include "ef/gaze.hpp"
#include "ef/posture.hpp"

namespace ef {

struct FusionConfig {
  double dominated_threshold = 30.0;
  double gap_tolerance = 2.0;
  double jva_min_overlap = 1.0;
  int jva_min_participants = 2;
  double disengage_dwell = 10.0;
  double posture_smooth = 1.0;  // full width of the centered majority window
  int gaze_switch_frames = 3;

  void validate() const;  // throws InvalidConfig
};

// Two instants closer than this are the same instant.
inline constexpr double kTimeEps = 1e-9;

struct SpeechInterval {
  std::string speaker;
  double start = 0.0;
  double end = 0.0;
};

struct GazeInterval {
  std::string participant;
  GazeTarget target;
  double start = 0.0;
  double end = 0.0;
};

struct PostureInterval {
  std::string participant;
  PostureLabel label = PostureLabel::Neutral;
  double start = 0.0;
  double end = 0.0;
};

struct PointingObservation {
  std::string participant;
  HandSide side = HandSide::Right;
  double t_window_start = 0.0;
  std::vector<std::string> selected;
};

struct PointingEpisode {
  std::string participant;
  HandSide side = HandSide::Right;
  std::string target;
  std::vector<std::string> selected;
  double start = 0.0;
  double end = 0.0;
};

// Everything fusion needs from one frame.
struct FrameObservations {
  double t = 0.0;
  std::map<std::string, GazeTarget> gaze;       // raw per-frame target of each present body
  std::map<std::string, PostureLabel> posture;  // per-frame label, when classification runs
  std::vector<PointingObservation> pointing;
  std::vector<SpeechActivity> speech;           // state changes; unlisted speakers keep theirs
};

struct EventDelta {
  enum class Type { Opened, Closed };
  Type type = Type::Opened;
  EngagementEvent event;
};

// Assigns monotone ids and records opened/closed deltas.
class EventLog {
 public:
  std::uint64_t open(EngagementEvent event);
  void close(std::uint64_t id, double t_end, std::optional<std::vector<std::string>> participants = std::nullopt);
  std::uint64_t emit_closed(EngagementEvent event);

  std::vector<EventDelta> take_deltas();
  // Every event, in id order.
  std::vector<EngagementEvent> events() const;

 private:
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, EngagementEvent> events_;
  std::vector<EventDelta> deltas_;
};

// ---- batch detectors ----------------------------------------------------

std::vector<EngagementEvent> detect_dominated(std::span<const SpeechInterval> speech, const FusionConfig& cfg);
std::vector<EngagementEvent> detect_jva(std::span<const GazeInterval> gaze, const FusionConfig& cfg);
std::vector<EngagementEvent> detect_disengagement(std::span<const PostureInterval> posture,
                                                  std::span<const GazeInterval> gaze, const FusionConfig& cfg);
std::vector<EngagementEvent> pointing_selections(std::span<const PointingEpisode> episodes);

// Sorts by (t_start, kind, participants, target, t_end) and renumbers ids from 1.
void canonicalize(std::vector<EngagementEvent>& events);

// Equal in everything but the id.
bool same_event(const EngagementEvent& a, const EngagementEvent& b);

// Interval timelines of a whole session, derived offline: speech runs, gaze
// after debouncing, posture after centered majority smoothing, pointing
// episodes.
struct SessionTimelines {
  std::vector<SpeechInterval> speech;
  std::vector<GazeInterval> gaze;
  std::vector<PostureInterval> posture;
  std::vector<PointingEpisode> pointing;
  double t_first = 0.0;
  double t_last = 0.0;
};

SessionTimelines build_timelines(std::span<const FrameObservations> frames, const FusionConfig& cfg);

// All four batch detectors, canonicalized.
std::vector<EngagementEvent> detect_all(const SessionTimelines& timelines, const FusionConfig& cfg);

// Majority label of a window; ties keep `previous` when it is among the
// leaders, else the earliest label in class order. nullopt for an empty window.
std::optional<PostureLabel> majority_label(const std::array<int, kPostureClasses>& counts,
                                           std::optional<PostureLabel> previous);

// ---- incremental engine -------------------------------------------------

namespace detail {

class FloorTracker {
 public:
  explicit FloorTracker(const FusionConfig& cfg) : cfg_(cfg) {}

  // Processes turn releases strictly before t and crossings up to t, with the
  // activity state that has held since the last call.
  void advance(double t, EventLog& log);
  // Activity from t onward.
  void set_active(const std::string& speaker, bool active, double t);
  // Processes what happens exactly at t under the new activity state.
  void settle(double t, EventLog& log);
  // Ends the session at t_end: everybody falls silent and any open turn closes.
  void finish(double t_end, EventLog& log);

 private:
  struct Speaker {
    bool active = false;
    double run_start = 0.0;
    double last_end = -std::numeric_limits<double>::infinity();
  };

  std::optional<double> crossing_time() const;
  std::optional<double> release_time() const;
  void cross(double at, EventLog& log);
  void release(double at, EventLog& log);
  void grant(const std::string& speaker, double turn_start);

  FusionConfig cfg_;
  std::map<std::string, Speaker> speakers_;
  std::optional<std::string> holder_;
  double turn_start_ = 0.0;
  double run_anchor_ = 0.0;    // start of the holder's current run, clamped to the turn
  double accumulated_ = 0.0;   // holder speech over completed runs of this turn
  std::optional<std::uint64_t> event_;
  double last_turn_end_ = -std::numeric_limits<double>::infinity();
};

class JvaTracker {
 public:
  explicit JvaTracker(const FusionConfig& cfg) : cfg_(cfg) {}
  void apply(double t, std::span<const std::pair<std::string, GazeTarget>> changes, EventLog& log);
  void advance(double horizon, EventLog& log);
  void finish(double t_end, EventLog& log);

 private:
  struct Candidate {
    double start = 0.0;
    std::set<std::string> members;
    std::optional<std::uint64_t> id;
  };
  void close(const GazeTarget& target, double t, EventLog& log);

  FusionConfig cfg_;
  std::map<std::string, GazeTarget> current_;
  std::map<GazeTarget, Candidate> open_;
};

class DisengageTracker {
 public:
  explicit DisengageTracker(const FusionConfig& cfg) : cfg_(cfg) {}
  void set_posture(const std::string& participant, std::optional<PostureLabel> label);
  void set_gaze(const std::string& participant, const GazeTarget& target);
  // Re-evaluates the touched participants at t.
  void apply(double t, const std::set<std::string>& touched, EventLog& log);
  void advance(double horizon, EventLog& log);
  void finish(double t_end, EventLog& log);

 private:
  struct State {
    std::optional<PostureLabel> posture;
    std::optional<GazeTarget> gaze;
    bool active = false;
    double start = 0.0;
    std::optional<std::uint64_t> id;
  };
  void close(const std::string& participant, State& s, double t, EventLog& log);

  FusionConfig cfg_;
  std::map<std::string, State> states_;
};

class PointingTracker {
 public:
  void update(double t, std::span<const PointingObservation> observations, EventLog& log);
  void finish(double t_end, EventLog& log);

 private:
  using Key = std::pair<std::string, HandSide>;
  std::map<Key, PointingEpisode> open_;
  std::map<Key, double> last_end_;
};

// Commits a new gaze target once it has been seen on `frames` consecutive
// frames, backdated to the first of them.
class GazeDebouncer {
 public:
  explicit GazeDebouncer(int frames) : frames_(frames) {}
  std::optional<std::pair<double, GazeTarget>> push(double t, const GazeTarget& raw);
  // Earliest time a not-yet-committed change could carry.
  std::optional<double> pending_since() const {
    return count_ > 0 ? std::optional<double>(candidate_since_) : std::nullopt;
  }

 private:
  int frames_;
  bool started_ = false;
  GazeTarget committed_;
  GazeTarget candidate_;
  double candidate_since_ = 0.0;
  int count_ = 0;
};

// Centered majority filter over a window of posture_smooth seconds.
class PostureSmoother {
 public:
  explicit PostureSmoother(double width) : half_(width / 2.0) {}
  // Returns (frame time, smoothed label) changes that became final.
  std::vector<std::pair<double, std::optional<PostureLabel>>> push(double t, std::optional<PostureLabel> raw);
  std::vector<std::pair<double, std::optional<PostureLabel>>> flush();
  std::optional<double> pending_since() const;

 private:
  void smooth_front(std::vector<std::pair<double, std::optional<PostureLabel>>>& out, bool force);

  double half_;
  std::deque<std::pair<double, std::optional<PostureLabel>>> frames_;
  std::size_t next_ = 0;  // first frame in frames_ without a smoothed value
  bool emitted_any_ = false;
  std::optional<PostureLabel> previous_;
};

}  // namespace detail

class FusionEngine {
 public:
  explicit FusionEngine(FusionConfig cfg = {});

  // Throws NonMonotoneTime unless obs.t exceeds the previous update time.
  std::vector<EventDelta> update(const FrameObservations& obs);
  // Closes every open event at the last update time.
  std::vector<EventDelta> finish();

  std::vector<EngagementEvent> events() const { return log_.events(); }
  const FusionConfig& config() const { return cfg_; }

 private:
  struct Change {
    double t;
    std::string participant;
    std::optional<GazeTarget> gaze;
    std::optional<std::optional<PostureLabel>> posture;
  };

  void release_until(double horizon, bool inclusive);

  FusionConfig cfg_;
  EventLog log_;
  detail::FloorTracker floor_;
  detail::JvaTracker jva_;
  detail::DisengageTracker disengage_;
  detail::PointingTracker pointing_;
  std::map<std::string, detail::GazeDebouncer> gaze_;
  std::map<std::string, detail::PostureSmoother> posture_;
  std::multimap<double, Change> queue_;
  std::optional<double> t_first_;
  std::optional<double> t_last_;
  bool finished_ = false;
};

}  // namespace ef
