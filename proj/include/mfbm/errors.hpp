#pragma once

#include <stdexcept>
#include <string>

namespace mfbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters are structurally inconsistent or violate the model constraints.
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Not enough samples for the requested filter, dilation or lag.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// A factorisation, positivity guard or degenerate normalisation failed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// The requested case lies outside what the model formulas cover.
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace mfbm
