#pragma once

#include <stdexcept>
#include <string>

namespace sticky {

enum class ErrorCode {
  ok = 0,
  invalid_argument,
  pole,
  domain,
  branch,
  pole_proximity,
  non_convergence,
  nesting,
  truncation,
  tail,
  degenerate_state,
  window,
  underflow,
  schema,
  io,
  numeric,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace sticky
