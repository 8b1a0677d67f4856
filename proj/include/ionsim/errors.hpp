#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ionsim {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two ions (or a probe point and a wire axis) closer than the model allows.
class SingularityError : public SimError {
 public:
  using SimError::SimError;
};

// Iteration budget exhausted; carries the best iterate seen so far.
class ConvergenceError : public SimError {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> best = {})
      : SimError(msg), best_iterate(std::move(best)) {}
  std::vector<double> best_iterate;
};

// Hessian has a negative eigenvalue beyond tolerance at a reported equilibrium.
class InstabilityError : public SimError {
 public:
  InstabilityError(const std::string& msg, int mode = -1, double eigenvalue = 0.0)
      : SimError(msg), mode_index(mode), eigenvalue(eigenvalue) {}
  int mode_index;
  double eigenvalue;
};

// A quantity blows up for a structural reason (e.g. eta ~ omega^{-3/2} at a soft mode).
class DivergenceError : public SimError {
 public:
  DivergenceError(const std::string& msg, int mode = -1) : SimError(msg), mode_index(mode) {}
  int mode_index;
};

// Distribution window cannot reach the required probability mass.
class TruncationError : public SimError {
 public:
  using SimError::SimError;
};

class FitError : public SimError {
 public:
  FitError(const std::string& msg, std::vector<double> best = {},
           std::vector<std::vector<double>> curves = {})
      : SimError(msg), best_params(std::move(best)), curves(std::move(curves)) {}
  std::vector<double> best_params;
  std::vector<std::vector<double>> curves;
};

class NotFoundError : public SimError {
 public:
  using SimError::SimError;
};

// Config or layout file problem; line 0 means "not line-specific".
class ConfigError : public SimError {
 public:
  ConfigError(const std::string& msg, int line = 0)
      : SimError(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}
  int line;
};

}  // namespace ionsim
