#pragma once

// Session replay: frames through gaze, gesture, posture and fusion, events out.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>

#include "ef/config.hpp"
#include "ef/fusion.hpp"
#include "ef/io.hpp"

namespace ef {

struct SessionPaths {
  std::filesystem::path frames;
  std::filesystem::path objects;
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> models;  // enables posture classification
  std::filesystem::path output;
};

struct ReplaySummary {
  std::size_t frames_read = 0;
  std::size_t processed = 0;
  std::size_t rejected = 0;
  std::size_t violations = 0;
  std::size_t opened = 0;
  std::map<EventKind, std::size_t> events;  // closed events by kind
};

class ReplaySession {
 public:
  ReplaySession(ObjectRegistry registry, EngineConfig cfg, std::optional<SeatModels> models = std::nullopt);

  // Frames with violations are counted and skipped. Throws NonMonotoneTime
  // when the timestamp does not exceed the previous frame's.
  std::vector<EventDelta> push(const ParsedFrame& parsed);
  std::vector<EventDelta> finish();

  const ReplaySummary& summary() const { return summary_; }

  // Per-frame derived data of a valid frame. Advances hand tracks and seats.
  FrameObservations observe(const SkeletonFrame& frame);

 private:
  void count(const std::vector<EventDelta>& deltas);

  ObjectRegistry registry_;
  EngineConfig cfg_;
  std::optional<SeatModels> models_;
  FusionEngine engine_;
  std::map<std::pair<std::string, HandSide>, HandTrack> hands_;
  std::optional<SeatAssignment> seats_;
  std::optional<double> last_t_;
  ReplaySummary summary_;
};

// Reads frame lines from `frames`, writes one event line per delta to
// `events`.
ReplaySummary replay_stream(std::istream& frames, const ObjectRegistry& registry, const EngineConfig& cfg,
                            const std::optional<SeatModels>& models, std::ostream& events);

ReplaySummary run_replay(const SessionPaths& paths);

// Bodies seated at `seat` (by assign_seats on each frame) joined with their
// labels on (t, body). Bodies without a label are skipped.
std::vector<PostureExample> collect_posture_examples(std::span<const SkeletonFrame> frames,
                                                     std::span<const PostureLabelRecord> labels, Seat seat,
                                                     const PostureConfig& cfg = {});

}  // namespace ef
