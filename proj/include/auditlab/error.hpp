#pragma once

#include <stdexcept>
#include <string>

namespace auditlab {

enum class ErrorKind {
  config,   // bad user input or configuration; CLI exit code 2
  domain,   // argument outside an operation's domain
  data,     // malformed input data
  numeric,  // estimation failed (non-convergence, rank deficiency)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::domain: return "domain";
    case ErrorKind::data: return "data";
    case ErrorKind::numeric: return "numeric";
  }
  return "unknown";
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace auditlab
