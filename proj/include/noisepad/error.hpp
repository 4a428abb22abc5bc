#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace noisepad {

enum class ErrorCode : std::uint8_t {
  domain = 1,
  protocol = 2,
  one_time_violation = 3,
  key_exhausted = 4,
  reconciliation_failure = 5,
  validation = 6,
  bad_magic = 7,
  bad_version = 8,
  truncated = 9,
  oversize = 10,
  unknown_message = 11,
  channel = 12,
  tap = 13,
  confirm_mismatch = 14,
  io = 15,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::one_time_violation: return "one-time-violation";
    case ErrorCode::key_exhausted: return "key-exhausted";
    case ErrorCode::reconciliation_failure: return "reconciliation-failure";
    case ErrorCode::validation: return "validation";
    case ErrorCode::bad_magic: return "bad-magic";
    case ErrorCode::bad_version: return "bad-version";
    case ErrorCode::truncated: return "truncated";
    case ErrorCode::oversize: return "oversize";
    case ErrorCode::unknown_message: return "unknown-message";
    case ErrorCode::channel: return "channel";
    case ErrorCode::tap: return "tap";
    case ErrorCode::confirm_mismatch: return "confirm-mismatch";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the wire ERROR frame) can tell the classes apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace noisepad
