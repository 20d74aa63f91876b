#pragma once

// Exception hierarchy shared by every module. Numeric failures derive from
// bhl::NumericError (CLI exit code 1); bad inputs derive from
// bhl::DomainError or bhl::ConfigError (CLI exit code 2).

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bhl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (bad parameter range, empty window...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance within budget.
class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, std::size_t index)
      : NumericError(what + " (index " + std::to_string(index) + ")"),
        index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// The moment table is too short for the requested evaluation.
class InsufficientMomentsError : public NumericError {
 public:
  InsufficientMomentsError(const std::string& what, std::size_t required)
      : NumericError(what + "; need n_max >= " + std::to_string(required)),
        required_(required) {}

  std::size_t required_n_max() const noexcept { return required_; }

 private:
  std::size_t required_;
};

/// m[n]^2 <= m[n-1] m[n+1] failed beyond round-off.
class LogConvexityError : public NumericError {
 public:
  LogConvexityError(std::size_t index, double defect)
      : NumericError("log-convexity violated at n = " + std::to_string(index) +
                     " (defect " + std::to_string(defect) +
                     "); moments are not accurate enough"),
        index_(index),
        defect_(defect) {}

  std::size_t index() const noexcept { return index_; }
  double defect() const noexcept { return defect_; }

 private:
  std::size_t index_;
  double defect_;
};

/// Iterative eigen solver failed to converge.
class ConvergenceError : public NumericError {
 public:
  ConvergenceError(const std::string& what, std::size_t index,
                   std::size_t iterations)
      : NumericError(what + " (index " + std::to_string(index) + ", " +
                     std::to_string(iterations) + " iterations)"),
        index_(index),
        iterations_(iterations) {}

  std::size_t index() const noexcept { return index_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t index_;
  std::size_t iterations_;
};

/// A quantity that is infinite for the given input (e.g. a Hardy norm).
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Lattice covering check found a point outside every disk.
class CoverageError : public NumericError {
 public:
  CoverageError(const std::string& what, double x, double y)
      : NumericError(what + " at (" + std::to_string(x) + ", " +
                     std::to_string(y) + ")"),
        x_(x),
        y_(y) {}

  double witness_x() const noexcept { return x_; }
  double witness_y() const noexcept { return y_; }

 private:
  double x_;
  double y_;
};

/// Malformed experiment configuration; carries the offending line and field.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line, std::string field)
      : Error(format(what, line, field)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            const std::string& field) {
    std::string out = "config error";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + what;
  }

  std::size_t line_;
  std::string field_;
};

}  // namespace bhl
