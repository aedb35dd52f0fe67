#include "ef/replay.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ef {

ReplaySession::ReplaySession(ObjectRegistry registry, EngineConfig cfg, std::optional<SeatModels> models)
    : registry_(std::move(registry)), cfg_(cfg), models_(std::move(models)), engine_(cfg.fusion) {
  cfg_.validate();
  if (models_ && !models_->complete()) {
    for (Seat seat : kSeats) (void)models_->at(seat);  // throws MissingSeatModel
  }
}

FrameObservations ReplaySession::observe(const SkeletonFrame& frame) {
  FrameObservations obs;
  obs.t = frame.t;
  obs.speech = frame.speech;

  for (const Body& body : frame.bodies) {
    try {
      obs.gaze[body.id] = gaze_target(body, registry_, frame.bodies, cfg_.gaze);
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateHead) throw;
      obs.gaze[body.id] = GazeTarget::none();
    }
  }

  if (models_) {
    seats_ = assign_seats(frame.bodies, seats_, cfg_.posture);
    for (const Body& body : frame.bodies)
      obs.posture[body.id] = classify_posture(*models_, seats_->seats.at(body.id), body).label;
  }

  std::set<std::pair<std::string, HandSide>> present;
  for (const HandLandmarks& hand : frame.hands) {
    const auto key = std::pair{hand.body_id, hand.side};
    if (!present.insert(key).second) continue;  // first record of a hand wins
    auto it = hands_.try_emplace(key, hand.body_id, hand.side).first;
    it->second.push(frame.t, hand, cfg_.gesture.stroke_window);
    if (!it->second.ready(cfg_.gesture.stroke_window)) continue;
    std::optional<PointingDetection> detection;
    try {
      detection = detect_pointing(it->second.window(), registry_, cfg_.gesture);
    } catch (const Error& e) {
      if (e.code() != Errc::DegenerateDigit) throw;
    }
    if (detection && !detection->selected.empty()) {
      obs.pointing.push_back({detection->body_id, detection->side, detection->t_window_start, detection->selected});
    }
  }
  std::erase_if(hands_, [&](const auto& entry) { return !present.contains(entry.first); });
  return obs;
}

std::vector<EventDelta> ReplaySession::push(const ParsedFrame& parsed) {
  ++summary_.frames_read;
  const double t = parsed.frame.t;
  if (std::isfinite(t)) {
    if (last_t_ && !(t > *last_t_)) {
      throw Error(Errc::NonMonotoneTime, "frame " + std::to_string(summary_.frames_read) + " has timestamp " +
                                             format_number(t) + ", not after " + format_number(*last_t_));
    }
    last_t_ = t;
  }
  if (!parsed.violations.empty()) {
    ++summary_.rejected;
    summary_.violations += parsed.violations.size();
    return {};
  }
  ++summary_.processed;
  auto deltas = engine_.update(observe(parsed.frame));
  count(deltas);
  return deltas;
}

std::vector<EventDelta> ReplaySession::finish() {
  auto deltas = engine_.finish();
  count(deltas);
  return deltas;
}

void ReplaySession::count(const std::vector<EventDelta>& deltas) {
  for (const EventDelta& d : deltas) {
    if (d.type == EventDelta::Type::Opened) {
      ++summary_.opened;
    } else {
      ++summary_.events[d.event.kind];
    }
  }
}

ReplaySummary replay_stream(std::istream& frames, const ObjectRegistry& registry, const EngineConfig& cfg,
                            const std::optional<SeatModels>& models, std::ostream& events) {
  ReplaySession session(registry, cfg, models);
  auto write = [&events](const std::vector<EventDelta>& deltas) {
    for (const EventDelta& d : deltas) events << serialize_event(d.event) << '\n';
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(frames, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    write(session.push(parse_frame_record(line, line_no)));
  }
  write(session.finish());
  return session.summary();
}

ReplaySummary run_replay(const SessionPaths& paths) {
  const EngineConfig cfg = paths.config ? load_config(*paths.config) : EngineConfig{};
  ObjectRegistry registry = load_object_registry(paths.objects);
  std::optional<SeatModels> models;
  if (paths.models) models = load_seat_models(*paths.models);

  std::ifstream in(paths.frames);
  if (!in) throw Error(Errc::Io, "cannot read frames " + paths.frames.string());
  std::ostringstream out;
  const ReplaySummary summary = replay_stream(in, registry, cfg, models, out);
  write_text_file(paths.output, out.str());
  return summary;
}

std::vector<PostureExample> collect_posture_examples(std::span<const SkeletonFrame> frames,
                                                     std::span<const PostureLabelRecord> labels, Seat seat,
                                                     const PostureConfig& cfg) {
  std::map<std::pair<double, std::string>, PostureLabel> by_key;
  for (const PostureLabelRecord& r : labels) by_key[{r.t, r.body}] = r.label;

  std::vector<PostureExample> out;
  std::optional<SeatAssignment> seats;
  for (const SkeletonFrame& frame : frames) {
    seats = assign_seats(frame.bodies, seats, cfg);
    for (const Body& body : frame.bodies) {
      if (seats->seats.at(body.id) != seat) continue;
      auto it = by_key.find({frame.t, body.id});
      if (it == by_key.end()) continue;
      out.push_back({flatten_features(body), static_cast<int>(it->second)});
    }
  }
  return out;
}

}  // namespace ef
