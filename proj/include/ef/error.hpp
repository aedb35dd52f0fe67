#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ef {

enum class Errc {
  DegenerateRay,
  InvalidCone,
  DegenerateHead,
  DegenerateDigit,
  InsufficientWindow,
  TooManyBodies,
  DuplicateBodyId,
  EmptyBatch,
  ShapeMismatch,
  MissingSeatModel,
  NonMonotoneTime,
  MalformedInterval,
  ParseError,
  DuplicateObjectId,
  InvalidAabb,
  MissingModelFile,
  InvalidConfig,
  InvalidScript,
  Io,
};

std::string_view to_string(Errc code) noexcept;

// Input errors map to CLI exit code 1; everything else is an internal failure.
bool is_input_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ef
