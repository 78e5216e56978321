#include "quasidiff/error.hpp"

namespace quasidiff {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::insufficient_extent: return "insufficient-extent";
    case ErrorCode::seam_violation: return "seam-violation";
    case ErrorCode::duplicate_point: return "duplicate-point";
    case ErrorCode::ambiguous_removal: return "ambiguous-removal";
    case ErrorCode::not_uniformly_discrete: return "not-uniformly-discrete";
    case ErrorCode::empty_spectrum: return "empty-spectrum";
    case ErrorCode::degenerate_trial: return "degenerate-trial";
    case ErrorCode::unknown_scenario: return "unknown-scenario";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::consistency_error: return "consistency-error";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::config_error: return "config-error";
  }
  return "error";
}

}  // namespace quasidiff
