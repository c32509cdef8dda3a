#include "kanto/error.hpp"

namespace kanto {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::validation: return "validation";
    case ErrorCode::parse: return "parse";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::state: return "state";
    case ErrorCode::range: return "range";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::input_too_short: return "input_too_short";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::io: return "io";
    case ErrorCode::permission: return "permission";
    case ErrorCode::checksum: return "checksum";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

int exit_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io:
    case ErrorCode::permission:
    case ErrorCode::checksum:
    case ErrorCode::unsupported_version:
      return 2;
    case ErrorCode::internal:
      return 3;
    default:
      return 1;
  }
}

}  // namespace kanto
