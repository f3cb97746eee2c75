#pragma once

#include <stdexcept>
#include <string>

namespace sloppykit {

// Base of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid value fed to a mathematical operation (nonpositive parameter,
// out-of-domain state, malformed vector sizes).
struct DomainError : Error {
  using Error::Error;
};

// Invalid or inconsistent configuration / input file. CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Text input that does not match the expected format. CLI exit code 2.
struct ParseError : ConfigError {
  using ConfigError::ConfigError;
};

// Numerical failure: integration blow-up, singular matrix, degenerate
// weights. CLI exit code 3.
struct NumericError : Error {
  using Error::Error;
};

// A pipeline stage failed; earlier artifacts are kept. CLI exit code 4.
struct StageError : Error {
  StageError(const std::string& stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_name(stage) {}
  std::string stage_name;
};

}  // namespace sloppykit
