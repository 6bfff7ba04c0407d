#pragma once

#include <stdexcept>
#include <string>

namespace pcc {

// Parameter outside its mathematical domain (alpha <= |beta|, nu too small, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Requested skewness/variance combination has no valid dispersion (Sigma_11 <= 0),
// or a moment target lies outside the attainable range of the family.
class FeasibilityError : public ParameterError {
 public:
  explicit FeasibilityError(const std::string& msg) : ParameterError(msg) {}
};

// A numeric routine failed to deliver (root not bracketable, quadrature not
// converged, eigen decomposition failed, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or degenerate input data (bad CSV, constant column, NaNs, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid run configuration (bad flag combination, missing file, bad grid).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// An iterative fit exhausted its iteration budget without meeting tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  explicit NonConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcc
