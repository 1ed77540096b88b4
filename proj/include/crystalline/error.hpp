#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace crystalline {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: inadmissible energy, invalid configuration, violated
// preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InvalidEnergy : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A discrete g_i <= 0. Unreachable for energies with f + f'' > 0.
class NonConvexFrankDiagram : public Error {
 public:
  NonConvexFrankDiagram(std::size_t index, double value)
      : Error("discrete stiffness g_" + std::to_string(index) + " = " +
              std::to_string(value) + " is not positive"),
        index_(index),
        value_(value) {}
  std::size_t index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t index_;
  double value_;
};

class DegenerateInitialization : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidComparison : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class OutOfDomain : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failures of a time integration. Carries the last valid state so callers
// can inspect how far the run got.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double time,
                   std::vector<double> last_state = {})
      : Error(what), time_(time), last_state_(std::move(last_state)) {}
  double time() const noexcept { return time_; }
  const std::vector<double>& last_state() const noexcept { return last_state_; }

 private:
  double time_;
  std::vector<double> last_state_;
};

class SideVanished : public NumericalFailure {
 public:
  SideVanished(std::size_t side, double time, double length,
               std::vector<double> last_state = {})
      : NumericalFailure("side " + std::to_string(side) + " vanished at t = " +
                             std::to_string(time) + " (length " +
                             std::to_string(length) + ")",
                         time, std::move(last_state)),
        side_(side) {}
  std::size_t side() const noexcept { return side_; }

 private:
  std::size_t side_;
};

class StepUnderflow : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class ConvexityLost : public NumericalFailure {
 public:
  ConvexityLost(std::size_t index, double time, std::vector<double> last_state = {})
      : NumericalFailure("support field lost convexity at node " +
                             std::to_string(index) + ", t = " + std::to_string(time),
                         time, std::move(last_state)),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class OriginOutside : public NumericalFailure {
 public:
  OriginOutside(std::size_t side, double time)
      : NumericalFailure("origin is not inside the polygon: d_" + std::to_string(side) +
                             " <= 0",
                         time),
        side_(side) {}
  std::size_t side() const noexcept { return side_; }

 private:
  std::size_t side_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace crystalline
