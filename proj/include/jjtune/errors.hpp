#pragma once

#include <stdexcept>
#include <string>

namespace jjtune {

/// Input data violates a schema or model invariant (exit code 2 in the CLI).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A source file could not be parsed; message carries the line number.
struct parse_error : validation_error {
  using validation_error::validation_error;
};

/// Statistics requested on a population too small to support them.
struct stats_error : validation_error {
  using validation_error::validation_error;
};

/// Curve fit rejected (underdetermined or degenerate data).
struct fit_error : validation_error {
  using validation_error::validation_error;
};

/// A tuning plan cannot be constructed for the requested target (exit code 3).
struct planning_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failure, with the offending path in the message (exit code 4).
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operating point outside the transmon approximation's validity range.
/// Callers that know what they are doing can pass an override flag instead.
struct regime_error : std::domain_error {
  using std::domain_error::domain_error;
};

} // namespace jjtune
