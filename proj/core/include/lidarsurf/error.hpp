#pragma once

#include <stdexcept>
#include <string>

namespace lidarsurf {

// Raised when inputs violate a documented precondition (bad dims, bad config).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised on malformed or truncated files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a numerical quantity that must be finite is not.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace lidarsurf
