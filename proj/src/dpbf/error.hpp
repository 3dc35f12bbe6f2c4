#pragma once

#include <stdexcept>
#include <string>

namespace dpbf {

enum class ErrorCode {
  kInvalidParameter = 1,
  kOverflow,
  kOutOfUniverse,
  kParamMismatch,
  kCorruptPayload,
  kCapacity,
  kConfig,
  kIo,
};

// All recoverable failures in the core are reported as Error; the C API maps
// code() onto dpbf_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace dpbf
