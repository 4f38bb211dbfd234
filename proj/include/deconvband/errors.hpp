#pragma once

#include <stdexcept>

namespace deconvband {

// Bad shapes, malformed data, violated preconditions on user-supplied values.
class input_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Numeric failure along an estimation path.
class numeric_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Density non-positive everywhere, degenerate variance, and similar
// data/bandwidth mismatches.
class estimation_error : public numeric_error {
public:
  using numeric_error::numeric_error;
};

// Singular corrected-moment system in the polynomial pilot fit.
class pilot_error : public numeric_error {
public:
  using numeric_error::numeric_error;
};

}  // namespace deconvband
