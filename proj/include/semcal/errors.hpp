#pragma once

#include <stdexcept>
#include <string>

namespace semcal {

enum class ErrorCode {
  io_error,
  parse_error,
  unknown_class,
  dimension_mismatch,
  no_valid_pixels,
  insufficient_overlap,
  degenerate_scene,
  invalid_argument,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable category next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace semcal
