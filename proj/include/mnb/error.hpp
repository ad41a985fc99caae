#pragma once

#include <stdexcept>
#include <string>

namespace mnb {

/// Broad failure categories. The CLI maps each one to its own exit code.
enum class ErrorKind {
  invalid_argument,  // precondition on a numeric argument
  parse,             // malformed input file or config
  validation,        // model / data invariant violated
  numerical,         // solver failure, unbounded LP
  resource,          // configured work budget exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::resource: return "resource";
  }
  return "unknown";
}

}  // namespace mnb
