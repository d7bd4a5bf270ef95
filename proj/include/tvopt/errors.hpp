#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tvopt {

// Dimension mismatches and malformed arguments.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// rho(A) >= 1, or A / Q violating the latent-dynamics invariants.
class UnstableDynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ExplorationDivergedError : public std::runtime_error {
 public:
  ExplorationDivergedError(const std::string& what, std::size_t t)
      : std::runtime_error(what), t_(t) {}
  std::size_t t() const { return t_; }

 private:
  std::size_t t_;
};

// Stacked window without full column rank.
class ExcitationError : public std::runtime_error {
 public:
  ExcitationError(const std::string& what, std::size_t t) : std::runtime_error(what), t_(t) {}
  std::size_t t() const { return t_; }

 private:
  std::size_t t_;
};

class IllConditionedError : public std::runtime_error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonconvergenceError : public std::runtime_error {
 public:
  NonconvergenceError(const std::string& what, Eigen::VectorXd best, double residual)
      : std::runtime_error(what), best_(std::move(best)), residual_(residual) {}
  const Eigen::VectorXd& best_iterate() const { return best_; }
  double residual() const { return residual_; }

 private:
  Eigen::VectorXd best_;
  double residual_;
};

}  // namespace tvopt
