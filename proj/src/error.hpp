#pragma once

#include <stdexcept>
#include <string>

namespace shiftlab {

// Mirrors sl_status in the public C header; keep the numeric values in sync.
enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch = 2,
  kSingular = 3,
  kNotConverged = 4,
  kDiverged = 5,
  kData = 6,
  kIo = 7,
  kConfig = 8,
  kUnsupported = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace shiftlab
