#include "ef/error.hpp"

namespace ef {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DegenerateRay: return "DegenerateRay";
    case Errc::InvalidCone: return "InvalidCone";
    case Errc::DegenerateHead: return "DegenerateHead";
    case Errc::DegenerateDigit: return "DegenerateDigit";
    case Errc::InsufficientWindow: return "InsufficientWindow";
    case Errc::TooManyBodies: return "TooManyBodies";
    case Errc::DuplicateBodyId: return "DuplicateBodyId";
    case Errc::EmptyBatch: return "EmptyBatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MissingSeatModel: return "MissingSeatModel";
    case Errc::NonMonotoneTime: return "NonMonotoneTime";
    case Errc::MalformedInterval: return "MalformedInterval";
    case Errc::ParseError: return "ParseError";
    case Errc::DuplicateObjectId: return "DuplicateObjectId";
    case Errc::InvalidAabb: return "InvalidAabb";
    case Errc::MissingModelFile: return "MissingModelFile";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::InvalidScript: return "InvalidScript";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

bool is_input_error(Errc code) noexcept {
  switch (code) {
    case Errc::NonMonotoneTime:
    case Errc::ParseError:
    case Errc::DuplicateObjectId:
    case Errc::InvalidAabb:
    case Errc::MissingModelFile:
    case Errc::InvalidConfig:
    case Errc::InvalidScript:
    case Errc::MalformedInterval:
    case Errc::Io:
      return true;
    default:
      return false;
  }
}

}  // namespace ef
