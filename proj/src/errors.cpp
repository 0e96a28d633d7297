#include "semcal/errors.hpp"

namespace semcal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::unknown_class: return "unknown_class";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::no_valid_pixels: return "no_valid_pixels";
    case ErrorCode::insufficient_overlap: return "insufficient_overlap";
    case ErrorCode::degenerate_scene: return "degenerate_scene";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

}  // namespace semcal
