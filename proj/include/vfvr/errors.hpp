#pragma once

#include <stdexcept>
#include <string>

namespace vfvr {

/// Bad or missing user input (files, config values). CLI exit status 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A computation produced a non-finite or otherwise unusable value. CLI exit status 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vfvr
