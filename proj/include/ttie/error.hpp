#pragma once

#include <stdexcept>
#include <string>

namespace ttie {

// Error taxonomy. The CLI maps the kind to a machine-readable JSON payload
// and a nonzero exit code; library code just throws.
enum class ErrorKind {
  config,           // unparseable / unknown config key
  validation,       // config parsed but violates an invariant
  argument,         // bad operation argument (k out of range, T <= 0, ...)
  shape,            // tensor/vector dimensions disagree
  io,               // missing file, unreadable image, unwritable directory
  incompatibility,  // checkpoint does not match the active config
  divergence,       // training produced a non-finite loss
  numerical,        // non-finite values where finite ones are required
};

inline const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config: return "config";
    case ErrorKind::validation: return "validation";
    case ErrorKind::argument: return "argument";
    case ErrorKind::shape: return "shape";
    case ErrorKind::io: return "io";
    case ErrorKind::incompatibility: return "incompatibility";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  const char* kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void check(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace ttie
