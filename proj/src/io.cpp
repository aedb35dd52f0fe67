#include "ef/io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace ef {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
  throw Error(Errc::ParseError, (line_no > 0 ? "line " + std::to_string(line_no) + ": " : std::string()) + what);
}

json parse_json(std::string_view text, std::size_t line_no) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) parse_fail(line_no, "not valid JSON");
  return j;
}

const json& member(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) parse_fail(line_no, std::string("missing \"") + key + "\"");
  return *it;
}

double number(const json& j, std::size_t line_no, const char* what) {
  if (!j.is_number()) parse_fail(line_no, std::string(what) + " must be a number");
  return j.get<double>();
}

std::string text(const json& j, std::size_t line_no, const char* what) {
  if (!j.is_string()) parse_fail(line_no, std::string(what) + " must be a string");
  return j.get<std::string>();
}

const json& array(const json& j, std::size_t line_no, const char* what) {
  if (!j.is_array()) parse_fail(line_no, std::string(what) + " must be an array");
  return j;
}

Vec3 vec3(const json& j, std::size_t line_no, const char* what) {
  if (!j.is_array() || j.size() != 3) parse_fail(line_no, std::string(what) + " must be [x,y,z]");
  return {number(j[0], line_no, what), number(j[1], line_no, what), number(j[2], line_no, what)};
}

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }

}  // namespace

ParsedFrame parse_frame_record(std::string_view line, std::size_t line_no) {
  const json j = parse_json(line, line_no);
  if (!j.is_object()) parse_fail(line_no, "frame record must be an object");

  ParsedFrame out;
  SkeletonFrame& f = out.frame;
  f.t = number(member(j, "t", line_no), line_no, "\"t\"");

  for (const json& b : array(member(j, "bodies", line_no), line_no, "\"bodies\"")) {
    if (!b.is_object()) parse_fail(line_no, "body must be an object");
    Body body;
    body.id = text(member(b, "id", line_no), line_no, "body id");
    const json& joints = array(member(b, "joints", line_no), line_no, "\"joints\"");
    body.joints.assign(joints.size(), Joint{});
    for (std::size_t i = 0; i < joints.size(); ++i) {
      const json& row = joints[i];
      if (!row.is_array() || row.size() != 7) parse_fail(line_no, "joint must be [px,py,pz,qw,qx,qy,qz]");
      for (int k = 0; k < 3; ++k) body.joints[i].position[k] = number(row[k], line_no, "joint value");
      for (int k = 0; k < 4; ++k) body.joints[i].orientation[k] = number(row[3 + k], line_no, "joint value");
    }
    f.bodies.push_back(std::move(body));
  }

  if (auto it = j.find("hands"); it != j.end()) {
    for (const json& h : array(*it, line_no, "\"hands\"")) {
      if (!h.is_object()) parse_fail(line_no, "hand must be an object");
      HandLandmarks hand;
      hand.body_id = text(member(h, "body", line_no), line_no, "hand body");
      const std::string side = text(member(h, "side", line_no), line_no, "hand side");
      if (side != "L" && side != "R") parse_fail(line_no, "hand side must be \"L\" or \"R\"");
      hand.side = side == "L" ? HandSide::Left : HandSide::Right;
      const json& lm = array(member(h, "lm", line_no), line_no, "\"lm\"");
      hand.points.assign(lm.size(), Vec3::Zero());
      for (std::size_t i = 0; i < lm.size(); ++i) hand.points[i] = vec3(lm[i], line_no, "landmark");
      f.hands.push_back(std::move(hand));
    }
  }

  if (auto it = j.find("speech"); it != j.end()) {
    for (const json& s : array(*it, line_no, "\"speech\"")) {
      if (!s.is_object()) parse_fail(line_no, "speech entry must be an object");
      const json& on = member(s, "on", line_no);
      if (!on.is_boolean()) parse_fail(line_no, "\"on\" must be true or false");
      f.speech.push_back({text(member(s, "spk", line_no), line_no, "speaker"), on.get<bool>()});
    }
  }

  normalize_orientations(f);
  out.violations = validate_frame(f);
  return out;
}

SkeletonFrame parse_frame_line(std::string_view line, std::size_t line_no) {
  ParsedFrame parsed = parse_frame_record(line, line_no);
  if (!parsed.violations.empty()) {
    const Violation& v = parsed.violations.front();
    std::string what = std::string(to_string(v.kind)) + " for '" + v.subject + "'";
    if (v.index >= 0) what += " at index " + std::to_string(v.index);
    parse_fail(line_no, what);
  }
  return std::move(parsed.frame);
}

std::string serialize_frame(const SkeletonFrame& frame) {
  ordered_json j;
  j["t"] = frame.t;
  ordered_json bodies = ordered_json::array();
  for (const Body& b : frame.bodies) {
    ordered_json joints = ordered_json::array();
    for (const Joint& joint : b.joints) {
      const Vec3& p = joint.position;
      const Quat4& q = joint.orientation;
      joints.push_back(ordered_json::array({p.x(), p.y(), p.z(), q[0], q[1], q[2], q[3]}));
    }
    ordered_json body;
    body["id"] = b.id;
    body["joints"] = std::move(joints);
    bodies.push_back(std::move(body));
  }
  j["bodies"] = std::move(bodies);
  if (!frame.hands.empty()) {
    ordered_json hands = ordered_json::array();
    for (const HandLandmarks& h : frame.hands) {
      ordered_json hand;
      hand["body"] = h.body_id;
      hand["side"] = std::string(hand_side_code(h.side));
      ordered_json lm = ordered_json::array();
      for (const Vec3& p : h.points) lm.push_back(vec3_json(p));
      hand["lm"] = std::move(lm);
      hands.push_back(std::move(hand));
    }
    j["hands"] = std::move(hands);
  }
  if (!frame.speech.empty()) {
    ordered_json speech = ordered_json::array();
    for (const SpeechActivity& s : frame.speech) {
      ordered_json entry;
      entry["spk"] = s.speaker_id;
      entry["on"] = s.active;
      speech.push_back(std::move(entry));
    }
    j["speech"] = std::move(speech);
  }
  return j.dump();
}

ObjectRegistry parse_object_registry(std::string_view content) {
  const json j = parse_json(content, 0);
  if (!j.is_object()) parse_fail(0, "objects file must be an object");
  ObjectRegistry registry;
  for (const json& o : array(member(j, "objects", 0), 0, "\"objects\"")) {
    if (!o.is_object()) parse_fail(0, "object entry must be an object");
    TaskObject obj;
    obj.id = text(member(o, "id", 0), 0, "object id");
    if (auto it = o.find("label"); it != o.end()) obj.label = text(*it, 0, "object label");
    obj.aabb = {vec3(member(o, "min", 0), 0, "\"min\""), vec3(member(o, "max", 0), 0, "\"max\"")};
    registry.add(std::move(obj));
  }
  return registry;
}

ObjectRegistry load_object_registry(const std::filesystem::path& path) {
  return parse_object_registry(read_text_file(path));
}

std::string serialize_object_registry(const ObjectRegistry& registry) {
  ordered_json objects = ordered_json::array();
  for (const TaskObject& o : registry) {
    ordered_json entry;
    entry["id"] = o.id;
    entry["label"] = o.label;
    entry["min"] = vec3_json(o.aabb.min);
    entry["max"] = vec3_json(o.aabb.max);
    objects.push_back(std::move(entry));
  }
  ordered_json j;
  j["objects"] = std::move(objects);
  return j.dump(2) + "\n";
}

std::string serialize_event(const EngagementEvent& e) {
  ordered_json j;
  j["id"] = e.id;
  j["kind"] = std::string(to_string(e.kind));
  j["t0"] = e.t_start;
  j["t1"] = e.t_end ? ordered_json(*e.t_end) : ordered_json(nullptr);
  j["who"] = e.participants;
  j["target"] = e.target ? ordered_json(*e.target) : ordered_json(nullptr);
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : e.metadata) meta[k] = v;
  j["meta"] = std::move(meta);
  return j.dump();
}

EngagementEvent parse_event_line(std::string_view line, std::size_t line_no) {
  const json j = parse_json(line, line_no);
  if (!j.is_object()) parse_fail(line_no, "event record must be an object");
  EngagementEvent e;
  const json& id = member(j, "id", line_no);
  if (!id.is_number_unsigned()) parse_fail(line_no, "\"id\" must be a non-negative integer");
  e.id = id.get<std::uint64_t>();
  const auto kind = event_kind_from_string(text(member(j, "kind", line_no), line_no, "\"kind\""));
  if (!kind) parse_fail(line_no, "unknown event kind");
  e.kind = *kind;
  e.t_start = number(member(j, "t0", line_no), line_no, "\"t0\"");
  const json& t1 = member(j, "t1", line_no);
  if (!t1.is_null()) e.t_end = number(t1, line_no, "\"t1\"");
  for (const json& who : array(member(j, "who", line_no), line_no, "\"who\""))
    e.participants.push_back(text(who, line_no, "participant"));
  const json& target = member(j, "target", line_no);
  if (!target.is_null()) e.target = text(target, line_no, "\"target\"");
  if (auto it = j.find("meta"); it != j.end()) {
    if (!it->is_object()) parse_fail(line_no, "\"meta\" must be an object");
    for (auto m = it->begin(); m != it->end(); ++m) e.metadata[m.key()] = text(m.value(), line_no, "meta value");
  }
  return e;
}

std::vector<EngagementEvent> read_event_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::vector<EngagementEvent> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_event_line(line, line_no));
  }
  return out;
}

std::string serialize_label(const PostureLabelRecord& r) {
  ordered_json j;
  j["t"] = r.t;
  j["body"] = r.body;
  j["label"] = std::string(to_string(r.label));
  return j.dump();
}

std::vector<PostureLabelRecord> read_label_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::vector<PostureLabelRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json j = parse_json(line, line_no);
    if (!j.is_object()) parse_fail(line_no, "label record must be an object");
    PostureLabelRecord r;
    r.t = number(member(j, "t", line_no), line_no, "\"t\"");
    r.body = text(member(j, "body", line_no), line_no, "\"body\"");
    const auto label = posture_from_string(text(member(j, "label", line_no), line_no, "\"label\""));
    if (!label) parse_fail(line_no, "label must be LeanIn, Neutral or LeanOut");
    r.label = *label;
    out.push_back(std::move(r));
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  // Devices, pipes and the like are written in place; renaming over them
  // would replace the node itself.
  std::error_code st_ec;
  const auto st = std::filesystem::status(path, st_ec);
  if (std::filesystem::exists(st) && !std::filesystem::is_regular_file(st)) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + path.string());
    return;
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace ef
