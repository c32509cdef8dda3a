#pragma once

#include <stdexcept>
#include <string>

namespace kanto {

enum class ErrorCode {
  validation,
  parse,
  conflict,
  state,
  range,
  parameter,
  input_too_short,
  insufficient_data,
  not_found,
  io,
  permission,
  checksum,
  unsupported_version,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

/// Process exit status for an error class: 1 validation, 2 I/O, 3 internal.
int exit_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kanto
