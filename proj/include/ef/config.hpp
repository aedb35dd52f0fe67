#pragma once

// Engine-wide settings and the flat key=value file that overrides them.

#include <filesystem>
#include <string>
#include <string_view>

#include "ef/fusion.hpp"
#include "ef/gaze.hpp"
#include "ef/gesture.hpp"
#include "ef/posture.hpp"

namespace ef {

struct EngineConfig {
  GazeConfig gaze;
  GestureConfig gesture;
  PostureConfig posture;
  FusionConfig fusion;

  void validate() const;  // throws InvalidConfig
};

// One `key = value` per line; '#' starts a comment. Angles are in degrees in
// the file and radians in memory. range_m sets both the gaze and the pointing
// range. Unknown keys and malformed values throw InvalidConfig.
EngineConfig parse_config(std::string_view text);
EngineConfig load_config(const std::filesystem::path& path);

// Every key with its current value, in a form parse_config reads back.
std::string format_config(const EngineConfig& cfg);

}  // namespace ef
