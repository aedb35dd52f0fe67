#include "ef/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ef {

void EngineConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw Error(Errc::InvalidConfig, what);
  };
  check(gaze.half_angle > 0.0 && gaze.half_angle < deg_to_rad(90.0), "gaze_half_angle_deg must be in (0, 90)");
  check(gesture.point_half_angle > 0.0 && gesture.point_half_angle < deg_to_rad(90.0),
        "point_half_angle_deg must be in (0, 90)");
  check(gaze.range > 0.0 && std::isfinite(gaze.range), "range_m must be positive");
  check(gesture.range > 0.0 && std::isfinite(gesture.range), "range_m must be positive");
  check(gaze.head_radius > 0.0, "head radius must be positive");
  check(gesture.max_stroke_speed > 0.0, "max_stroke_speed must be positive");
  check(gesture.min_extension > 0.0 && gesture.min_extension <= 1.0, "min_extension must be in (0, 1]");
  check(gesture.max_curl > 0.0 && gesture.max_curl <= 1.0, "max_curl must be in (0, 1]");
  check(gesture.stroke_window > 0.0, "stroke_window_s must be positive");
  check(posture.hysteresis > 0.0, "hysteresis_m must be positive");
  check(posture.hidden > 0, "hidden width must be positive");
  fusion.validate();
}

namespace {

double parse_double(std::string_view key, std::string_view value, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw Error(Errc::InvalidConfig,
                "line " + std::to_string(line) + ": '" + std::string(key) + "' needs a number, got '" +
                    std::string(value) + "'");
  }
  return out;
}

int parse_int(std::string_view key, std::string_view value, std::size_t line) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw Error(Errc::InvalidConfig,
                "line " + std::to_string(line) + ": '" + std::string(key) + "' needs an integer, got '" +
                    std::string(value) + "'");
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

using Setter = std::function<void(EngineConfig&, std::string_view, std::size_t)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"gaze_half_angle_deg",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.gaze.half_angle = deg_to_rad(parse_double("gaze_half_angle_deg", v, l));
       }},
      {"point_half_angle_deg",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.gesture.point_half_angle = deg_to_rad(parse_double("point_half_angle_deg", v, l));
       }},
      {"range_m",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.gaze.range = c.gesture.range = parse_double("range_m", v, l);
       }},
      {"max_stroke_speed",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.gesture.max_stroke_speed = parse_double("max_stroke_speed", v, l);
       }},
      {"min_extension",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.gesture.min_extension = parse_double("min_extension", v, l);
       }},
      {"max_curl",
       [](EngineConfig& c, std::string_view v, std::size_t l) { c.gesture.max_curl = parse_double("max_curl", v, l); }},
      {"stroke_window_s",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.gesture.stroke_window = parse_double("stroke_window_s", v, l);
       }},
      {"hysteresis_m",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.posture.hysteresis = parse_double("hysteresis_m", v, l);
       }},
      {"dominated_threshold_s",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.dominated_threshold = parse_double("dominated_threshold_s", v, l);
       }},
      {"gap_tolerance_s",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.gap_tolerance = parse_double("gap_tolerance_s", v, l);
       }},
      {"jva_min_overlap_s",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.jva_min_overlap = parse_double("jva_min_overlap_s", v, l);
       }},
      {"jva_min_participants",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.jva_min_participants = parse_int("jva_min_participants", v, l);
       }},
      {"disengage_dwell_s",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.disengage_dwell = parse_double("disengage_dwell_s", v, l);
       }},
      {"posture_smooth_s",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.posture_smooth = parse_double("posture_smooth_s", v, l);
       }},
      {"gaze_switch_frames",
       [](EngineConfig& c, std::string_view v, std::size_t l) {
         c.fusion.gaze_switch_frames = parse_int("gaze_switch_frames", v, l);
       }},
  };
  return table;
}

}  // namespace

EngineConfig parse_config(std::string_view text) {
  EngineConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw Error(Errc::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    it->second(cfg, value, line_no);
  }
  cfg.validate();
  return cfg;
}

EngineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const EngineConfig& cfg) {
  std::ostringstream out;
  auto put = [&out](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  put("gaze_half_angle_deg", format_number(rad_to_deg(cfg.gaze.half_angle)));
  put("point_half_angle_deg", format_number(rad_to_deg(cfg.gesture.point_half_angle)));
  put("range_m", format_number(cfg.gaze.range));
  put("max_stroke_speed", format_number(cfg.gesture.max_stroke_speed));
  put("min_extension", format_number(cfg.gesture.min_extension));
  put("max_curl", format_number(cfg.gesture.max_curl));
  put("stroke_window_s", format_number(cfg.gesture.stroke_window));
  put("hysteresis_m", format_number(cfg.posture.hysteresis));
  put("dominated_threshold_s", format_number(cfg.fusion.dominated_threshold));
  put("gap_tolerance_s", format_number(cfg.fusion.gap_tolerance));
  put("jva_min_overlap_s", format_number(cfg.fusion.jva_min_overlap));
  put("jva_min_participants", std::to_string(cfg.fusion.jva_min_participants));
  put("disengage_dwell_s", format_number(cfg.fusion.disengage_dwell));
  put("posture_smooth_s", format_number(cfg.fusion.posture_smooth));
  put("gaze_switch_frames", std::to_string(cfg.fusion.gaze_switch_frames));
  return out.str();
}

}  // namespace ef
