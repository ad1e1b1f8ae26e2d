#pragma once

#include <stdexcept>
#include <string>

namespace sdde {

/// Query outside a grid, path window or segment support.
class RangeError : public std::runtime_error {
public:
  explicit RangeError(const std::string& what) : std::runtime_error(what) {}
};

/// Dimension / sample-count mismatch between values that must be conformal.
class ShapeError : public std::invalid_argument {
public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation requested on a system outside its supported class.
class UnsupportedError : public std::invalid_argument {
public:
  explicit UnsupportedError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative numerical procedure failed to converge.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Scenario / configuration problems (maps to CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sdde
