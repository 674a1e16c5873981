#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace oirl {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An MDP, reward table or feature matrix violates its invariants.
class InvalidModel : public Error {
 public:
  using Error::Error;
};

/// Shapes of two cooperating inputs disagree.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A fixed-point iteration hit its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}

  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

/// A solver failure inside the online learner, tagged with where it happened.
class LearnerError : public Error {
 public:
  LearnerError(const std::string& what, std::size_t restart, long long observation)
      : Error(what), restart_(restart), observation_(observation) {}

  std::size_t restart() const { return restart_; }
  long long observation() const { return observation_; }

 private:
  std::size_t restart_;
  long long observation_;
};

}  // namespace oirl
