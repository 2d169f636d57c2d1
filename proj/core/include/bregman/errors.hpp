#pragma once

#include <stdexcept>
#include <string>

namespace bregman {

// Error taxonomy shared across the library. The CLI maps these onto
// stable exit codes (config -> 2, numeric -> 3, dimension/shape -> 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Signals a bregman_div value below the -1e-9 clamp threshold, i.e. a
// parameterization that lost convexity.
class ConvexityError : public Error {
 public:
  using Error::Error;
};

// Config / CSV / model-file parse failures.
class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bregman
