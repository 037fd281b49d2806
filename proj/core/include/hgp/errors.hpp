#pragma once

#include <stdexcept>
#include <string>

namespace hgp {

// Error taxonomy maps onto CLI exit codes: input/config -> 2, numeric -> 3.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible shapes or axes in matrix/layer operations.
class DimensionError : public Error {
  public:
    using Error::Error;
};

// NaN/Inf encountered, or an operation left the representable range.
class NumericError : public Error {
  public:
    using Error::Error;
};

// Malformed or inconsistent input data (CSV rows, topology, series).
class InputError : public Error {
  public:
    using Error::Error;
};

// Invalid configuration (unknown keys, missing gradients, bad ranges).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// SOM grading could not produce the requested number of grades.
class GradingError : public Error {
  public:
    using Error::Error;
};

}  // namespace hgp
