#pragma once

#include <stdexcept>
#include <string>

namespace hetbelief {

/// Bad input: malformed config, violated invariant, wrong shapes.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: blowup, divergence, non-convergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetbelief
