#pragma once

#include <stdexcept>
#include <string>

namespace eqop {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad file header, bad argument value, unknown name.
struct FormatError : Error {
  using Error::Error;
};

/// Incompatible shapes, grids, or tensor-product rules.
struct RuleError : Error {
  using Error::Error;
};

/// A numerical guard tripped (stability limit, divergence, rank deficiency).
struct NumericalError : Error {
  using Error::Error;
};

}  // namespace eqop
