#pragma once

#include <stdexcept>
#include <string>

namespace standings {

// Bad or inconsistent input data. The CLI maps this to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimation or simulation step failed numerically. CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace standings
