#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vicon {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the command-line tool reports for it.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

/// Malformed configuration, bad geometry or mismatched shapes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, malformed or exhausted input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Saturated responses, non-finite parameters, failed verification.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// Rows x cols of a grid, retina or window. 1-D geometry uses rows == 1.
struct Extent {
  std::size_t rows = 1;
  std::size_t cols = 1;

  constexpr std::size_t size() const noexcept { return rows * cols; }
  constexpr bool is_1d() const noexcept { return rows == 1; }
  friend constexpr bool operator==(const Extent&, const Extent&) = default;

  std::string str() const {
    return rows == 1 ? std::to_string(cols) : std::to_string(rows) + "x" + std::to_string(cols);
  }
};

/// One input vector: retina 0 pixels row-major, then retina 1 pixels.
struct Sample {
  std::vector<double> values;

  Sample() = default;
  explicit Sample(std::size_t n, double fill = 0.0) : values(n, fill) {}
  explicit Sample(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const Sample&, const Sample&) = default;
};

}  // namespace vicon
