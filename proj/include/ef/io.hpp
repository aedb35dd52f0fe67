#pragma once

// Line-delimited JSON records: frames in, events out, plus the object
// registry and posture label files.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ef/core.hpp"
#include "ef/posture.hpp"

namespace ef {

struct ParsedFrame {
  SkeletonFrame frame;
  std::vector<Violation> violations;  // after quaternion normalization
};

// Syntax and type problems throw ParseError naming `line_no`. Semantic
// problems (counts, quaternions, non-finite values, duplicate bodies) are
// returned as violations.
ParsedFrame parse_frame_record(std::string_view line, std::size_t line_no = 0);

// Strict form: any violation is a ParseError too.
SkeletonFrame parse_frame_line(std::string_view line, std::size_t line_no = 0);

// Canonical one-line form; "hands" and "speech" are omitted when empty.
std::string serialize_frame(const SkeletonFrame& frame);

ObjectRegistry parse_object_registry(std::string_view text);
ObjectRegistry load_object_registry(const std::filesystem::path& path);
std::string serialize_object_registry(const ObjectRegistry& registry);

// {"id","kind","t0","t1","who","target","meta"}; t1 is null while open.
std::string serialize_event(const EngagementEvent& event);
EngagementEvent parse_event_line(std::string_view line, std::size_t line_no = 0);
std::vector<EngagementEvent> read_event_file(const std::filesystem::path& path);

// Per-body posture labels used for training: {"t","body","label"}.
struct PostureLabelRecord {
  double t = 0.0;
  std::string body;
  PostureLabel label = PostureLabel::Neutral;
};

std::string serialize_label(const PostureLabelRecord& record);
std::vector<PostureLabelRecord> read_label_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ef
