#pragma once

#include <stdexcept>
#include <string>

namespace shrinklab {

// Error taxonomy mirrored by the CLI exit codes:
//   ConfigError -> 2, NumericError -> 3, PreconditionError -> 4.

// Malformed or unsupported inputs: bad parameter values, unknown
// distribution names, alphabets beyond the enumeration cap.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A distribution lacks the analytic pieces an operation needs.
class UnsupportedDistributionError : public ConfigError {
 public:
  explicit UnsupportedDistributionError(const std::string& what)
      : ConfigError(what) {}
};

// Numerical failure: quadrature that neither converges nor shows
// divergence, root finders running out of iterations.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical precondition of the requested computation fails
// (n below the solvable threshold, degenerate variance, an
// inapplicable dependence regime).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace shrinklab
