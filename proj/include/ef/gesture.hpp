#pragma once

// Two-stage pointing detection over hand-landmark tracks.
//
// Stage 1 decides whether the hand is in the stroke phase (held still with the
// index extended). Stage 2 classifies the shape of the last sample. Only when
// both agree is a pointing frustum cast from the index finger and intersected
// with the object registry. Either stage can be swapped through
// PointingStages.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ef/core.hpp"

namespace ef {

struct GestureConfig {
  double stroke_window = 0.2;       // seconds
  double max_stroke_speed = 0.15;   // m/s, index tip
  double min_extension = 0.9;       // index extension ratio for a point
  double max_curl = 0.75;           // other fingers must stay at or below this
  double point_half_angle = deg_to_rad(15.0);
  double range = 2.5;
};

enum class Finger { Thumb, Index, Middle, Ring, Pinky };

// |tip - wrist| over the summed segment lengths of the wrist-to-tip chain.
// 1.0 for a straight finger; 0 for a degenerate chain.
double extension_ratio(const HandLandmarks& hand, Finger finger);

struct HandSample {
  double t = 0.0;
  HandLandmarks landmarks;
};

struct HandTrackWindow {
  std::string body_id;
  HandSide side = HandSide::Right;
  std::vector<HandSample> samples;  // strictly increasing t

  double span() const { return samples.size() < 2 ? 0.0 : samples.back().t - samples.front().t; }
};

enum class GestureShape { Point, Other };

inline constexpr double kWindowSlack = 1e-9;

// Mean index-tip speed is the net tip displacement over the window span.
// Throws InsufficientWindow when the window spans less than stroke_window.
bool detect_stroke(const HandTrackWindow& window, const GestureConfig& cfg);

GestureShape classify_shape(const HandLandmarks& hand, const GestureConfig& cfg);

// Apex at the index tip, axis from the index MCP through the tip.
Coned pointing_frustum(const HandLandmarks& hand, const GestureConfig& cfg);

struct PointingDetection {
  std::string body_id;
  HandSide side = HandSide::Right;
  Coned frustum;
  std::vector<std::string> selected;  // nearest-to-axis first
  double t = 0.0;                      // last sample
  double t_window_start = 0.0;         // first sample of the stroke window
};

struct PointingStages {
  std::function<bool(const HandTrackWindow&, const GestureConfig&)> stroke = detect_stroke;
  std::function<GestureShape(const HandLandmarks&, const GestureConfig&)> shape = classify_shape;
};

// Stage 2 runs only when stage 1 reports a stroke.
std::optional<PointingDetection> detect_pointing(const HandTrackWindow& window, const ObjectRegistry& registry,
                                                 const GestureConfig& cfg, const PointingStages& stages = {});

// Rolling per-hand buffer that keeps the shortest suffix spanning at least
// stroke_window seconds.
class HandTrack {
 public:
  HandTrack(std::string body_id, HandSide side) : window_{std::move(body_id), side, {}} {}

  void push(double t, HandLandmarks landmarks, double stroke_window);
  void clear() { window_.samples.clear(); }
  bool ready(double stroke_window) const { return window_.span() >= stroke_window - kWindowSlack; }
  const HandTrackWindow& window() const { return window_; }

 private:
  HandTrackWindow window_;
};

}  // namespace ef
