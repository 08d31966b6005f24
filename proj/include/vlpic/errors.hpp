#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace vlpic {

/// Invalid user input: bad config values, bad dimensions, incompatible data.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A fixed-point solve did not reach tolerance within the iteration cap.
class NonconvergenceError : public std::runtime_error {
public:
  NonconvergenceError(const std::string& where, int iterations, double residual)
      : std::runtime_error(where + ": no convergence after " + std::to_string(iterations) +
                           " iterations (residual " + format(residual) + ")"),
        iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }

  int iterations_;
  double residual_;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Requested an operation the current discretization cannot provide
/// (e.g. a second derivative of a piecewise-linear spline).
class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace vlpic
