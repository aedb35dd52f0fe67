#include "ef/gesture.hpp"

#include <array>

namespace ef {
namespace {

using L = HandLandmark;

std::array<HandLandmark, 5> chain(Finger finger) {
  switch (finger) {
    case Finger::Thumb: return {L::Wrist, L::ThumbCmc, L::ThumbMcp, L::ThumbIp, L::ThumbTip};
    case Finger::Index: return {L::Wrist, L::IndexMcp, L::IndexPip, L::IndexDip, L::IndexTip};
    case Finger::Middle: return {L::Wrist, L::MiddleMcp, L::MiddlePip, L::MiddleDip, L::MiddleTip};
    case Finger::Ring: return {L::Wrist, L::RingMcp, L::RingPip, L::RingDip, L::RingTip};
    case Finger::Pinky: return {L::Wrist, L::PinkyMcp, L::PinkyPip, L::PinkyDip, L::PinkyTip};
  }
  return {};
}

}  // namespace

double extension_ratio(const HandLandmarks& hand, Finger finger) {
  const auto links = chain(finger);
  double path = 0.0;
  for (std::size_t i = 0; i + 1 < links.size(); ++i) path += (hand[links[i + 1]] - hand[links[i]]).norm();
  if (!(path > 0.0)) return 0.0;
  return (hand[links.back()] - hand[links.front()]).norm() / path;
}

bool detect_stroke(const HandTrackWindow& window, const GestureConfig& cfg) {
  const double span = window.span();
  if (window.samples.size() < 2 || span < cfg.stroke_window - kWindowSlack) {
    throw Error(Errc::InsufficientWindow, "hand window spans " + format_number(span) + " s, need " +
                                              format_number(cfg.stroke_window) + " s");
  }
  for (std::size_t i = 1; i < window.samples.size(); ++i) {
    if (!(window.samples[i].t > window.samples[i - 1].t)) {
      throw Error(Errc::InsufficientWindow, "hand window timestamps are not strictly increasing");
    }
  }
  const Vec3& first = window.samples.front().landmarks[L::IndexTip];
  const Vec3& last = window.samples.back().landmarks[L::IndexTip];
  if ((last - first).norm() / span > cfg.max_stroke_speed) return false;
  for (const HandSample& s : window.samples) {
    if (extension_ratio(s.landmarks, Finger::Index) < cfg.min_extension) return false;
  }
  return true;
}

GestureShape classify_shape(const HandLandmarks& hand, const GestureConfig& cfg) {
  if (extension_ratio(hand, Finger::Index) < cfg.min_extension) return GestureShape::Other;
  for (Finger f : {Finger::Thumb, Finger::Middle, Finger::Ring, Finger::Pinky}) {
    if (extension_ratio(hand, f) > cfg.max_curl) return GestureShape::Other;
  }
  return GestureShape::Point;
}

Coned pointing_frustum(const HandLandmarks& hand, const GestureConfig& cfg) {
  const Vec3& tip = hand[L::IndexTip];
  const Vec3 digit = tip - hand[L::IndexMcp];
  if (digit.norm() < 1e-6) {
    throw Error(Errc::DegenerateDigit, "index MCP and tip coincide on '" + hand.body_id + "'");
  }
  return Coned::make(tip, digit, cfg.point_half_angle, cfg.range);
}

std::optional<PointingDetection> detect_pointing(const HandTrackWindow& window, const ObjectRegistry& registry,
                                                 const GestureConfig& cfg, const PointingStages& stages) {
  if (!stages.stroke(window, cfg)) return std::nullopt;
  const HandSample& last = window.samples.back();
  if (stages.shape(last.landmarks, cfg) != GestureShape::Point) return std::nullopt;

  PointingDetection detection;
  detection.body_id = window.body_id;
  detection.side = window.side;
  detection.frustum = pointing_frustum(last.landmarks, cfg);
  detection.selected = select_objects(detection.frustum, registry);
  detection.t = last.t;
  detection.t_window_start = window.samples.front().t;
  return detection;
}

void HandTrack::push(double t, HandLandmarks landmarks, double stroke_window) {
  auto& samples = window_.samples;
  if (!samples.empty() && !(t > samples.back().t)) samples.clear();
  samples.push_back({t, std::move(landmarks)});
  // Drop the oldest sample while the remainder still covers the window.
  while (samples.size() > 2 && samples.back().t - samples[1].t >= stroke_window - kWindowSlack) {
    samples.erase(samples.begin());
  }
}

}  // namespace ef
