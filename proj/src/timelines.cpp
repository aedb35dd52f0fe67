#include <algorithm>
#include <map>

#include "ef/fusion.hpp"

// Offline construction of session timelines. Mirrors the streaming smoothers
// in fusion.cpp but works on the whole history at once.

namespace ef {

namespace {

struct GazeSeries {
  std::vector<double> t;
  std::vector<GazeTarget> raw;
};

// A new target takes over at the first of `frames` consecutive agreeing raws.
void debounce_gaze(const std::string& participant, const GazeSeries& s, int frames, double t_last,
                   std::vector<GazeInterval>& out) {
  const std::size_t n = s.t.size();
  if (n == 0) return;
  GazeTarget committed = s.raw[0];
  double seg_start = s.t[0];
  const auto need = static_cast<std::size_t>(frames);
  for (std::size_t k = 1; k < n; ++k) {
    if (s.raw[k] == committed || k + need > n) continue;
    bool agree = true;
    for (std::size_t j = k + 1; j < k + need; ++j) {
      if (!(s.raw[j] == s.raw[k])) {
        agree = false;
        break;
      }
    }
    if (!agree) continue;
    out.push_back({participant, committed, seg_start, s.t[k]});
    committed = s.raw[k];
    seg_start = s.t[k];
  }
  if (seg_start < t_last) out.push_back({participant, committed, seg_start, t_last});
}

struct PostureSeries {
  std::vector<double> t;
  std::vector<std::optional<PostureLabel>> raw;
};

void smooth_posture(const std::string& participant, const PostureSeries& s, double width, double t_last,
                    std::vector<PostureInterval>& out) {
  const double half = width / 2.0;
  const std::size_t n = s.t.size();
  std::optional<PostureLabel> previous;
  std::optional<std::pair<double, std::optional<PostureLabel>>> run;  // start, label
  auto close_run = [&](double end) {
    if (run && run->second && run->first < end) out.push_back({participant, *run->second, run->first, end});
  };

  std::size_t lo = 0, hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = s.t[k];
    while (tk - s.t[lo] > half) ++lo;
    if (hi < k) hi = k;
    while (hi + 1 < n && !(s.t[hi + 1] - tk > half)) ++hi;
    std::array<int, kPostureClasses> counts{};
    for (std::size_t j = lo; j <= hi; ++j)
      if (s.raw[j]) ++counts[static_cast<std::size_t>(*s.raw[j])];
    const auto label = majority_label(counts, previous);
    if (!run || label != run->second) {
      close_run(tk);
      run = std::pair{tk, label};
    }
    previous = label;
  }
  close_run(t_last);
}

}  // namespace

SessionTimelines build_timelines(std::span<const FrameObservations> frames, const FusionConfig& cfg) {
  cfg.validate();
  SessionTimelines tl;
  if (frames.empty()) return tl;
  tl.t_first = frames.front().t;
  tl.t_last = frames.back().t;

  std::map<std::string, double> speaking_since;
  std::map<std::string, GazeSeries> gaze;
  std::map<std::string, PostureSeries> posture;

  using Key = std::pair<std::string, HandSide>;
  std::map<Key, PointingEpisode> open;
  std::map<Key, double> last_end;

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameObservations& f = frames[i];
    if (i > 0 && !(f.t > frames[i - 1].t)) {
      throw Error(Errc::NonMonotoneTime, "timestamp " + format_number(f.t) + " does not follow " +
                                             format_number(frames[i - 1].t));
    }

    std::map<std::string, bool> speech;
    for (const SpeechActivity& s : f.speech) speech[s.speaker_id] = s.active;
    for (const auto& [speaker, active] : speech) {
      auto it = speaking_since.find(speaker);
      if (active && it == speaking_since.end()) {
        speaking_since.emplace(speaker, f.t);
      } else if (!active && it != speaking_since.end()) {
        tl.speech.push_back({speaker, it->second, f.t});
        speaking_since.erase(it);
      }
    }

    for (const auto& [p, target] : f.gaze) gaze.try_emplace(p);
    for (auto& [p, series] : gaze) {
      auto it = f.gaze.find(p);
      series.t.push_back(f.t);
      series.raw.push_back(it != f.gaze.end() ? it->second : GazeTarget::none());
    }

    for (const auto& [p, label] : f.posture) posture.try_emplace(p);
    for (auto& [p, series] : posture) {
      auto it = f.posture.find(p);
      series.t.push_back(f.t);
      series.raw.push_back(it != f.posture.end() ? std::optional<PostureLabel>(it->second) : std::nullopt);
    }

    std::map<Key, const PointingObservation*> seen;
    for (const PointingObservation& o : f.pointing) seen[{o.participant, o.side}] = &o;
    for (auto it = open.begin(); it != open.end();) {
      auto s = seen.find(it->first);
      if (s != seen.end() && !s->second->selected.empty() && s->second->selected.front() == it->second.target) {
        ++it;
        continue;
      }
      it->second.end = f.t;
      tl.pointing.push_back(it->second);
      last_end[it->first] = f.t;
      it = open.erase(it);
    }
    for (const auto& [key, o] : seen) {
      if (o->selected.empty() || open.contains(key)) continue;
      double start = o->t_window_start;
      if (auto le = last_end.find(key); le != last_end.end()) start = std::max(start, le->second);
      open.emplace(key, PointingEpisode{o->participant, o->side, o->selected.front(), o->selected, start, start});
    }
  }

  for (const auto& [speaker, since] : speaking_since)
    if (since < tl.t_last) tl.speech.push_back({speaker, since, tl.t_last});
  for (const auto& [p, series] : gaze) debounce_gaze(p, series, cfg.gaze_switch_frames, tl.t_last, tl.gaze);
  for (const auto& [p, series] : posture) smooth_posture(p, series, cfg.posture_smooth, tl.t_last, tl.posture);
  for (auto& [key, episode] : open) {
    episode.end = tl.t_last;
    tl.pointing.push_back(episode);
  }
  return tl;
}

}  // namespace ef
