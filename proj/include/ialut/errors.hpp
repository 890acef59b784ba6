#pragma once

#include <stdexcept>

namespace ialut {

// Malformed or unreadable input: bad magic, truncated payload, invalid
// configuration values.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Objects that must agree in dimensions do not.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite data, or an optimization that diverged.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ialut
