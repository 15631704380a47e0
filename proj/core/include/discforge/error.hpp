#pragma once

#include <stdexcept>
#include <string>

namespace discforge {

// Each code maps to a distinct CLI exit status.
enum class ErrorCode : int {
  kInvalidArgument = 2,
  kInvalidInstance = 3,
  kIo = 4,
  kNumerical = 5,
  kOracleBudget = 6,
  kNonTermination = 7,
  kInvariantViolation = 8,
  kMalformedTrace = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace discforge
