#pragma once

#include <stdexcept>
#include <string>

namespace cdlrec {

// Shape or length inconsistency between tensors/vectors.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse failures, referential-integrity violations and other bad-input cases.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Lookup of an id that was never cached.
struct CacheMissError : DataError {
  using DataError::DataError;
};

// Corrupt or truncated artifact file.
struct ChecksumError : DataError {
  using DataError::DataError;
};

// Artifact written by an incompatible format version.
struct VersionError : DataError {
  using DataError::DataError;
};

// Non-finite value where a finite number is required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration value or command usage.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cdlrec
