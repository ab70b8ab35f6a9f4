#pragma once

#include <stdexcept>
#include <string>

namespace polarimeter {

/// Bad input: malformed files, violated preconditions, unsupported graphs.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that was well posed but failed numerically
/// (non-convergence, vanishing normalizer).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polarimeter
