#pragma once

#include <stdexcept>
#include <string>

namespace gnp {

/// Bad arguments or malformed input data.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative routine diverged or failed to converge.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampled subspace block is identically zero.
class DegenerateSubspace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Experiment configuration rejected during validation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gnp
