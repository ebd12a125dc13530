#pragma once

#include <stdexcept>
#include <string>

namespace footrank {

/// Data or usage error: malformed input, violated precondition, bad argument.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment cannot be run on the available data (e.g. not enough history).
struct InfeasibleError : Error {
  using Error::Error;
};

}  // namespace footrank
