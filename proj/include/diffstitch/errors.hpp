#pragma once

#include <stdexcept>
#include <string>

namespace diffstitch {

enum class ErrorKind {
  InvalidInput,    // caller violated a value-level contract
  InvalidConfig,   // bad knob (temperature <= 0, unknown template, ...)
  Protocol,        // backend answered with the wrong shape
  Backend,         // transport / model failure
  Scenario,        // mock scenario cannot serve the request
  Aggregation,     // gather saw a missing or duplicate trace
  NoEvidence,      // nothing retained / nothing to vote on
  Extraction,      // expected region (code fence, tags) absent
  Io,              // filesystem
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Backend failures are annotated with the decode iteration they occurred in
/// (-1 when the call was not part of an iterative loop).
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what, int iteration = -1)
      : Error(ErrorKind::Backend, what), iteration_(iteration) {}

  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::Backend: return "backend";
    case ErrorKind::Scenario: return "scenario";
    case ErrorKind::Aggregation: return "aggregation";
    case ErrorKind::NoEvidence: return "no-evidence";
    case ErrorKind::Extraction: return "extraction";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace diffstitch
