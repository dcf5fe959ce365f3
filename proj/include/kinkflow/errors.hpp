#pragma once

#include <stdexcept>
#include <string>

namespace kinkflow {

// Raised when user-supplied parameters or file contents violate a documented
// precondition. Maps to process exit code 1 in the CLI.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical routine cannot meet its accuracy contract
// (non-convergence, loss of orthogonality, out-of-range probabilities).
// Maps to process exit code 2 in the CLI.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace kinkflow
