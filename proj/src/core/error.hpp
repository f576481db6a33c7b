#pragma once

#include <stdexcept>
#include <string>

namespace pol {

enum class ErrorCode {
  invalid_argument = 1,
  domain = 2,
  limit_exceeded = 3,
  non_convergence = 4,
  parse = 5,
  io = 6,
  precondition = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace pol
