#include "ef/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace ef {

void FusionConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::InvalidConfig, std::string(name) + " must be positive");
  };
  positive(dominated_threshold, "dominated_threshold");
  positive(gap_tolerance, "gap_tolerance");
  positive(jva_min_overlap, "jva_min_overlap");
  positive(disengage_dwell, "disengage_dwell");
  positive(posture_smooth, "posture_smooth");
  if (jva_min_participants < 2) throw Error(Errc::InvalidConfig, "jva_min_participants must be at least 2");
  if (gaze_switch_frames < 1) throw Error(Errc::InvalidConfig, "gaze_switch_frames must be positive");
}

// ---- EventLog ---------------------------------------------------------------

std::uint64_t EventLog::open(EngagementEvent event) {
  event.id = next_id_++;
  event.t_end.reset();
  events_[event.id] = event;
  deltas_.push_back({EventDelta::Type::Opened, event});
  return event.id;
}

void EventLog::close(std::uint64_t id, double t_end, std::optional<std::vector<std::string>> participants) {
  EngagementEvent& event = events_.at(id);
  event.t_end = t_end;
  if (participants) event.participants = std::move(*participants);
  deltas_.push_back({EventDelta::Type::Closed, event});
}

std::uint64_t EventLog::emit_closed(EngagementEvent event) {
  event.id = next_id_++;
  events_[event.id] = event;
  deltas_.push_back({EventDelta::Type::Closed, event});
  return event.id;
}

std::vector<EventDelta> EventLog::take_deltas() { return std::exchange(deltas_, {}); }

std::vector<EngagementEvent> EventLog::events() const {
  std::vector<EngagementEvent> out;
  out.reserve(events_.size());
  for (const auto& [id, e] : events_) out.push_back(e);
  return out;
}

namespace {

std::string target_kind(const GazeTarget& target) {
  return target.kind == GazeTarget::Kind::Participant ? "participant" : "object";
}

EngagementEvent dominated_event(const std::string& speaker, double turn_start, double crossing) {
  EngagementEvent e;
  e.kind = EventKind::DominatedDiscussion;
  e.t_start = turn_start;
  e.participants = {speaker};
  e.metadata["crossing"] = format_number(crossing);
  return e;
}

EngagementEvent jva_event(const GazeTarget& target, double start, const std::set<std::string>& members) {
  EngagementEvent e;
  e.kind = EventKind::JointAttention;
  e.t_start = start;
  e.participants.assign(members.begin(), members.end());
  e.target = target.id;
  e.metadata["target_kind"] = target_kind(target);
  return e;
}

EngagementEvent disengagement_event(const std::string& participant, double start) {
  EngagementEvent e;
  e.kind = EventKind::Disengagement;
  e.t_start = start;
  e.participants = {participant};
  return e;
}

EngagementEvent pointing_event(const PointingEpisode& episode) {
  EngagementEvent e;
  e.kind = EventKind::PointingSelection;
  e.t_start = (episode.start + episode.end) / 2.0;
  e.t_end = e.t_start;
  e.participants = {episode.participant};
  e.target = episode.target;
  e.metadata["hand"] = std::string(hand_side_code(episode.side));
  e.metadata["episode_start"] = format_number(episode.start);
  e.metadata["episode_end"] = format_number(episode.end);
  std::string joined;
  for (const auto& id : episode.selected) joined += (joined.empty() ? "" : ",") + id;
  e.metadata["selected"] = joined;
  return e;
}

template <typename Interval, typename KeyFn>
void check_intervals(std::span<const Interval> intervals, KeyFn key) {
  std::map<std::string, std::vector<std::pair<double, double>>> by_key;
  for (const Interval& iv : intervals) {
    if (!std::isfinite(iv.start) || !std::isfinite(iv.end) || !(iv.start < iv.end)) {
      throw Error(Errc::MalformedInterval, "interval for '" + key(iv) + "' has start >= end");
    }
    by_key[key(iv)].emplace_back(iv.start, iv.end);
  }
  for (auto& [k, list] : by_key) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].first < list[i - 1].second) {
        throw Error(Errc::MalformedInterval, "overlapping intervals for '" + k + "'");
      }
    }
  }
}

}  // namespace

// ---- FloorTracker -----------------------------------------------------------

namespace detail {

std::optional<double> FloorTracker::crossing_time() const {
  if (!holder_ || event_) return std::nullopt;
  if (!speakers_.at(*holder_).active) return std::nullopt;
  return run_anchor_ + (cfg_.dominated_threshold - accumulated_);
}

std::optional<double> FloorTracker::release_time() const {
  if (!holder_) return std::nullopt;
  std::optional<double> best;
  const Speaker& h = speakers_.at(*holder_);
  if (!h.active) best = h.last_end + cfg_.gap_tolerance;
  for (const auto& [id, s] : speakers_) {
    if (id == *holder_ || !s.active) continue;
    const double r = std::max(s.run_start, turn_start_) + cfg_.gap_tolerance;
    if (!best || r < *best) best = r;
  }
  return best;
}

void FloorTracker::cross(double at, EventLog& log) {
  event_ = log.open(dominated_event(*holder_, turn_start_, at));
}

void FloorTracker::grant(const std::string& speaker, double turn_start) {
  holder_ = speaker;
  turn_start_ = turn_start;
  run_anchor_ = turn_start;
  accumulated_ = 0.0;
  event_.reset();
}

void FloorTracker::release(double at, EventLog& log) {
  const std::string old = *holder_;
  const Speaker& h = speakers_.at(old);
  const double turn_end = h.active ? at : h.last_end;
  if (event_) log.close(*event_, turn_end);
  last_turn_end_ = turn_end;
  holder_.reset();
  event_.reset();

  const std::string* next = nullptr;
  double next_run = 0.0;
  for (const auto& [id, s] : speakers_) {
    if (id == old || !s.active) continue;
    if (next == nullptr || s.run_start < next_run - kTimeEps) {
      next = &id;
      next_run = s.run_start;
    }
  }
  if (next != nullptr) grant(*next, std::max(next_run, turn_end));
}

void FloorTracker::advance(double t, EventLog& log) {
  for (;;) {
    const auto c = crossing_time();
    const auto r = release_time();
    if (c && *c <= t + kTimeEps && (!r || *c <= *r + kTimeEps)) {
      cross(*c, log);
    } else if (r && *r < t - kTimeEps) {
      release(*r, log);
    } else {
      break;
    }
  }
}

void FloorTracker::set_active(const std::string& speaker, bool active, double t) {
  Speaker& s = speakers_[speaker];
  if (s.active == active) return;
  const bool holding = holder_ && *holder_ == speaker;
  s.active = active;
  if (active) {
    s.run_start = t;
    if (holding) run_anchor_ = std::max(t, turn_start_);
  } else {
    s.last_end = t;
    if (holding) accumulated_ += t - run_anchor_;
  }
}

void FloorTracker::settle(double t, EventLog& log) {
  for (;;) {
    const auto c = crossing_time();
    const auto r = release_time();
    if (c && *c <= t + kTimeEps && (!r || *c <= *r + kTimeEps)) {
      cross(*c, log);
      continue;
    }
    if (r && *r <= t + kTimeEps) {
      release(*r, log);
      continue;
    }
    if (!holder_) {
      const std::string* first = nullptr;
      double first_run = 0.0;
      for (const auto& [id, s] : speakers_) {
        if (!s.active) continue;
        if (first == nullptr || s.run_start < first_run - kTimeEps) {
          first = &id;
          first_run = s.run_start;
        }
      }
      if (first != nullptr) {
        grant(*first, std::max(first_run, last_turn_end_));
        continue;
      }
    }
    break;
  }
}

void FloorTracker::finish(double t_end, EventLog& log) {
  advance(t_end, log);
  for (auto& [id, s] : speakers_) set_active(id, false, t_end);
  if (holder_) {
    const double turn_end = speakers_.at(*holder_).last_end;
    if (event_) log.close(*event_, turn_end);
    last_turn_end_ = turn_end;
    holder_.reset();
    event_.reset();
  }
}

// ---- JvaTracker -------------------------------------------------------------

void JvaTracker::apply(double t, std::span<const std::pair<std::string, GazeTarget>> changes, EventLog& log) {
  std::set<GazeTarget> touched;
  for (const auto& [participant, target] : changes) {
    auto it = current_.find(participant);
    if (it != current_.end()) {
      if (it->second == target) continue;
      touched.insert(it->second);
      it->second = target;
    } else {
      current_.emplace(participant, target);
    }
    touched.insert(target);
  }
  for (const GazeTarget& target : touched) {
    if (target.is_none()) continue;
    std::set<std::string> members;
    for (const auto& [p, g] : current_)
      if (g == target) members.insert(p);
    auto it = open_.find(target);
    if (static_cast<int>(members.size()) >= cfg_.jva_min_participants) {
      if (it == open_.end()) {
        open_.emplace(target, Candidate{t, std::move(members), std::nullopt});
      } else {
        it->second.members.insert(members.begin(), members.end());
      }
    } else if (it != open_.end()) {
      close(target, t, log);
    }
  }
}

void JvaTracker::close(const GazeTarget& target, double t, EventLog& log) {
  auto node = open_.extract(target);
  Candidate& c = node.mapped();
  if (c.id) {
    log.close(*c.id, t, std::vector<std::string>(c.members.begin(), c.members.end()));
  } else if (t - c.start >= cfg_.jva_min_overlap) {
    EngagementEvent e = jva_event(target, c.start, c.members);
    e.t_end = t;
    log.emit_closed(std::move(e));
  }
}

void JvaTracker::advance(double horizon, EventLog& log) {
  for (auto& [target, c] : open_) {
    if (!c.id && horizon - c.start >= cfg_.jva_min_overlap) c.id = log.open(jva_event(target, c.start, c.members));
  }
}

void JvaTracker::finish(double t_end, EventLog& log) {
  while (!open_.empty()) close(open_.begin()->first, t_end, log);
}

// ---- DisengageTracker -------------------------------------------------------

void DisengageTracker::set_posture(const std::string& participant, std::optional<PostureLabel> label) {
  states_[participant].posture = label;
}

void DisengageTracker::set_gaze(const std::string& participant, const GazeTarget& target) {
  states_[participant].gaze = target;
}

void DisengageTracker::apply(double t, const std::set<std::string>& touched, EventLog& log) {
  for (const std::string& p : touched) {
    State& s = states_[p];
    const bool cond = s.posture == PostureLabel::LeanOut && s.gaze && s.gaze->is_none();
    if (cond && !s.active) {
      s.active = true;
      s.start = t;
    } else if (!cond && s.active) {
      close(p, s, t, log);
    }
  }
}

void DisengageTracker::close(const std::string& participant, State& s, double t, EventLog& log) {
  if (s.id) {
    log.close(*s.id, t);
  } else if (t - s.start >= cfg_.disengage_dwell) {
    EngagementEvent e = disengagement_event(participant, s.start);
    e.t_end = t;
    log.emit_closed(std::move(e));
  }
  s.active = false;
  s.id.reset();
}

void DisengageTracker::advance(double horizon, EventLog& log) {
  for (auto& [p, s] : states_) {
    if (s.active && !s.id && horizon - s.start >= cfg_.disengage_dwell) s.id = log.open(disengagement_event(p, s.start));
  }
}

void DisengageTracker::finish(double t_end, EventLog& log) {
  for (auto& [p, s] : states_)
    if (s.active) close(p, s, t_end, log);
}

// ---- PointingTracker --------------------------------------------------------

void PointingTracker::update(double t, std::span<const PointingObservation> observations, EventLog& log) {
  std::map<Key, const PointingObservation*> now;
  for (const PointingObservation& o : observations) now[{o.participant, o.side}] = &o;

  for (auto it = open_.begin(); it != open_.end();) {
    auto seen = now.find(it->first);
    const bool continues = seen != now.end() && !seen->second->selected.empty() &&
                           seen->second->selected.front() == it->second.target;
    if (continues) {
      ++it;
      continue;
    }
    it->second.end = t;
    log.emit_closed(pointing_event(it->second));
    last_end_[it->first] = t;
    it = open_.erase(it);
  }
  for (const auto& [key, o] : now) {
    if (o->selected.empty() || open_.contains(key)) continue;
    double start = o->t_window_start;
    if (auto le = last_end_.find(key); le != last_end_.end()) start = std::max(start, le->second);
    open_.emplace(key, PointingEpisode{o->participant, o->side, o->selected.front(), o->selected, start, start});
  }
}

void PointingTracker::finish(double t_end, EventLog& log) {
  for (auto& [key, episode] : open_) {
    episode.end = t_end;
    log.emit_closed(pointing_event(episode));
    last_end_[key] = t_end;
  }
  open_.clear();
}

// ---- streaming smoothers ----------------------------------------------------

std::optional<std::pair<double, GazeTarget>> GazeDebouncer::push(double t, const GazeTarget& raw) {
  if (!started_) {
    started_ = true;
    committed_ = raw;
    return std::pair{t, raw};
  }
  if (raw == committed_) {
    count_ = 0;
    return std::nullopt;
  }
  if (count_ > 0 && raw == candidate_) {
    ++count_;
  } else {
    candidate_ = raw;
    candidate_since_ = t;
    count_ = 1;
  }
  if (count_ >= frames_) {
    committed_ = candidate_;
    count_ = 0;
    return std::pair{candidate_since_, committed_};
  }
  return std::nullopt;
}

std::vector<std::pair<double, std::optional<PostureLabel>>> PostureSmoother::push(double t,
                                                                                 std::optional<PostureLabel> raw) {
  frames_.emplace_back(t, raw);
  std::vector<std::pair<double, std::optional<PostureLabel>>> out;
  smooth_front(out, false);
  return out;
}

std::vector<std::pair<double, std::optional<PostureLabel>>> PostureSmoother::flush() {
  std::vector<std::pair<double, std::optional<PostureLabel>>> out;
  smooth_front(out, true);
  return out;
}

std::optional<double> PostureSmoother::pending_since() const {
  if (next_ < frames_.size()) return frames_[next_].first;
  return std::nullopt;
}

void PostureSmoother::smooth_front(std::vector<std::pair<double, std::optional<PostureLabel>>>& out, bool force) {
  while (next_ < frames_.size()) {
    const double tk = frames_[next_].first;
    if (!force && !(frames_.back().first - tk > half_)) break;
    std::array<int, kPostureClasses> counts{};
    for (const auto& [tj, label] : frames_) {
      if (tk - tj > half_ || tj - tk > half_) continue;
      if (label) ++counts[static_cast<std::size_t>(*label)];
    }
    const auto smoothed = majority_label(counts, previous_);
    if (!emitted_any_ || smoothed != previous_) out.emplace_back(tk, smoothed);
    emitted_any_ = true;
    previous_ = smoothed;
    ++next_;
    while (next_ > 0 && next_ < frames_.size() && frames_[next_].first - frames_.front().first > half_) {
      frames_.pop_front();
      --next_;
    }
  }
}

}  // namespace detail

std::optional<PostureLabel> majority_label(const std::array<int, kPostureClasses>& counts,
                                           std::optional<PostureLabel> previous) {
  const int best = *std::max_element(counts.begin(), counts.end());
  if (best == 0) return std::nullopt;
  if (previous && counts[static_cast<std::size_t>(*previous)] == best) return previous;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] == best) return static_cast<PostureLabel>(i);
  return std::nullopt;
}

// ---- batch detectors --------------------------------------------------------

std::vector<EngagementEvent> detect_dominated(std::span<const SpeechInterval> speech, const FusionConfig& cfg) {
  check_intervals(speech, [](const SpeechInterval& s) { return s.speaker; });
  if (speech.empty()) return {};

  std::vector<double> breaks;
  for (const SpeechInterval& s : speech) {
    breaks.push_back(s.start);
    breaks.push_back(s.end);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  std::map<std::string, std::vector<const SpeechInterval*>> by_speaker;
  for (const SpeechInterval& s : speech) by_speaker[s.speaker].push_back(&s);

  EventLog log;
  detail::FloorTracker floor(cfg);
  for (double t : breaks) {
    floor.advance(t, log);
    for (const auto& [speaker, list] : by_speaker) {
      const bool active =
          std::any_of(list.begin(), list.end(), [t](const SpeechInterval* s) { return s->start <= t && t < s->end; });
      floor.set_active(speaker, active, t);
    }
    floor.settle(t, log);
  }
  floor.finish(breaks.back(), log);

  auto events = log.events();
  canonicalize(events);
  return events;
}

std::vector<EngagementEvent> detect_jva(std::span<const GazeInterval> gaze, const FusionConfig& cfg) {
  check_intervals(gaze, [](const GazeInterval& g) { return g.participant; });

  // target -> time -> (participant, +1 enter / -1 leave)
  std::map<GazeTarget, std::map<double, std::vector<std::pair<std::string, int>>>> sweeps;
  for (const GazeInterval& g : gaze) {
    if (g.target.is_none()) continue;
    sweeps[g.target][g.start].emplace_back(g.participant, +1);
    sweeps[g.target][g.end].emplace_back(g.participant, -1);
  }

  std::vector<EngagementEvent> events;
  for (const auto& [target, timeline] : sweeps) {
    std::map<std::string, int> present;
    std::optional<double> start;
    std::set<std::string> members;
    for (const auto& [t, changes] : timeline) {
      for (const auto& [p, delta] : changes) present[p] += delta;
      std::set<std::string> now;
      for (const auto& [p, n] : present)
        if (n > 0) now.insert(p);
      if (static_cast<int>(now.size()) >= cfg.jva_min_participants) {
        if (!start) {
          start = t;
          members.clear();
        }
        members.insert(now.begin(), now.end());
      } else if (start) {
        if (t - *start >= cfg.jva_min_overlap) {
          EngagementEvent e = jva_event(target, *start, members);
          e.t_end = t;
          events.push_back(std::move(e));
        }
        start.reset();
      }
    }
  }
  canonicalize(events);
  return events;
}

std::vector<EngagementEvent> detect_disengagement(std::span<const PostureInterval> posture,
                                                  std::span<const GazeInterval> gaze, const FusionConfig& cfg) {
  check_intervals(posture, [](const PostureInterval& p) { return p.participant; });
  check_intervals(gaze, [](const GazeInterval& g) { return g.participant; });

  // Per participant: the LeanOut spans and the gaze-at-nothing spans.
  std::map<std::string, std::pair<std::vector<std::pair<double, double>>, std::vector<std::pair<double, double>>>>
      spans;
  for (const PostureInterval& p : posture)
    if (p.label == PostureLabel::LeanOut) spans[p.participant].first.emplace_back(p.start, p.end);
  for (const GazeInterval& g : gaze)
    if (g.target.is_none()) spans[g.participant].second.emplace_back(g.start, g.end);

  auto covered = [](const std::vector<std::pair<double, double>>& list, double t) {
    return std::any_of(list.begin(), list.end(), [t](const auto& iv) { return iv.first <= t && t < iv.second; });
  };

  std::vector<EngagementEvent> events;
  for (const auto& [participant, lists] : spans) {
    const auto& [lean_out, looking_nowhere] = lists;
    if (lean_out.empty() || looking_nowhere.empty()) continue;
    std::vector<double> breaks;
    for (const auto* list : {&lean_out, &looking_nowhere})
      for (const auto& [a, b] : *list) {
        breaks.push_back(a);
        breaks.push_back(b);
      }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    bool active = false;
    double start = 0.0;
    for (double t : breaks) {
      const bool cond = covered(lean_out, t) && covered(looking_nowhere, t);
      if (cond && !active) {
        active = true;
        start = t;
      } else if (!cond && active) {
        if (t - start >= cfg.disengage_dwell) {
          EngagementEvent e = disengagement_event(participant, start);
          e.t_end = t;
          events.push_back(std::move(e));
        }
        active = false;
      }
    }
  }
  canonicalize(events);
  return events;
}

std::vector<EngagementEvent> pointing_selections(std::span<const PointingEpisode> episodes) {
  std::vector<EngagementEvent> events;
  for (const PointingEpisode& episode : episodes) events.push_back(pointing_event(episode));
  canonicalize(events);
  return events;
}

void canonicalize(std::vector<EngagementEvent>& events) {
  auto key = [](const EngagementEvent& e) {
    return std::tie(e.t_start, e.kind, e.participants, e.target, e.t_end);
  };
  std::stable_sort(events.begin(), events.end(),
                   [&](const EngagementEvent& a, const EngagementEvent& b) { return key(a) < key(b); });
  std::uint64_t id = 1;
  for (EngagementEvent& e : events) e.id = id++;
}

bool same_event(const EngagementEvent& a, const EngagementEvent& b) {
  return a.kind == b.kind && a.t_start == b.t_start && a.t_end == b.t_end && a.participants == b.participants &&
         a.target == b.target && a.metadata == b.metadata;
}

std::vector<EngagementEvent> detect_all(const SessionTimelines& timelines, const FusionConfig& cfg) {
  std::vector<EngagementEvent> all = detect_dominated(timelines.speech, cfg);
  for (auto&& batch : {detect_jva(timelines.gaze, cfg), detect_disengagement(timelines.posture, timelines.gaze, cfg),
                       pointing_selections(timelines.pointing)}) {
    all.insert(all.end(), batch.begin(), batch.end());
  }
  canonicalize(all);
  return all;
}

// ---- FusionEngine -----------------------------------------------------------

FusionEngine::FusionEngine(FusionConfig cfg) : cfg_(cfg), floor_(cfg), jva_(cfg), disengage_(cfg) {
  cfg_.validate();
}

std::vector<EventDelta> FusionEngine::update(const FrameObservations& obs) {
  const double t = obs.t;
  if (finished_) throw Error(Errc::NonMonotoneTime, "update after finish at t=" + format_number(t));
  if (!std::isfinite(t) || (t_last_ && !(t > *t_last_))) {
    throw Error(Errc::NonMonotoneTime,
                "timestamp " + format_number(t) + " does not follow " + format_number(t_last_.value_or(t)));
  }
  if (!t_first_) t_first_ = t;
  t_last_ = t;

  std::map<std::string, bool> speech;
  for (const SpeechActivity& s : obs.speech) speech[s.speaker_id] = s.active;
  floor_.advance(t, log_);
  for (const auto& [speaker, active] : speech) floor_.set_active(speaker, active, t);
  floor_.settle(t, log_);

  pointing_.update(t, obs.pointing, log_);

  for (const auto& [p, g] : obs.gaze) gaze_.try_emplace(p, cfg_.gaze_switch_frames);
  for (auto& [p, debouncer] : gaze_) {
    auto it = obs.gaze.find(p);
    const GazeTarget raw = it != obs.gaze.end() ? it->second : GazeTarget::none();
    if (auto change = debouncer.push(t, raw)) {
      queue_.emplace(change->first, Change{change->first, p, change->second, std::nullopt});
    }
  }

  for (const auto& [p, label] : obs.posture) posture_.try_emplace(p, cfg_.posture_smooth);
  for (auto& [p, smoother] : posture_) {
    auto it = obs.posture.find(p);
    const std::optional<PostureLabel> raw =
        it != obs.posture.end() ? std::optional<PostureLabel>(it->second) : std::nullopt;
    for (const auto& [tc, label] : smoother.push(t, raw)) queue_.emplace(tc, Change{tc, p, std::nullopt, label});
  }

  double horizon = t;
  for (const auto& [p, d] : gaze_)
    if (auto since = d.pending_since()) horizon = std::min(horizon, *since);
  for (const auto& [p, s] : posture_)
    if (auto since = s.pending_since()) horizon = std::min(horizon, *since);
  release_until(horizon, false);
  jva_.advance(horizon, log_);
  disengage_.advance(horizon, log_);

  return log_.take_deltas();
}

void FusionEngine::release_until(double horizon, bool inclusive) {
  while (!queue_.empty()) {
    const double t = queue_.begin()->first;
    if (!inclusive && !(t < horizon)) break;
    auto [first, last] = queue_.equal_range(t);
    std::vector<std::pair<std::string, GazeTarget>> gaze_changes;
    std::set<std::string> touched;
    for (auto it = first; it != last; ++it) {
      const Change& c = it->second;
      if (c.gaze) {
        gaze_changes.emplace_back(c.participant, *c.gaze);
        disengage_.set_gaze(c.participant, *c.gaze);
      }
      if (c.posture) disengage_.set_posture(c.participant, *c.posture);
      touched.insert(c.participant);
    }
    queue_.erase(first, last);
    jva_.apply(t, gaze_changes, log_);
    disengage_.apply(t, touched, log_);
  }
}

std::vector<EventDelta> FusionEngine::finish() {
  if (finished_ || !t_last_) {
    finished_ = true;
    return log_.take_deltas();
  }
  finished_ = true;
  const double t_end = *t_last_;
  floor_.finish(t_end, log_);
  pointing_.finish(t_end, log_);
  for (auto& [p, smoother] : posture_)
    for (const auto& [tc, label] : smoother.flush()) queue_.emplace(tc, Change{tc, p, std::nullopt, label});
  release_until(t_end, true);
  jva_.finish(t_end, log_);
  disengage_.finish(t_end, log_);
  return log_.take_deltas();
}

}  // namespace ef
