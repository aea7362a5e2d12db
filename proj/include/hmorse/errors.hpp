#pragma once

#include <stdexcept>
#include <string>

namespace hmorse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Evaluation at (or numerically at) the collision set.
class CollisionError : public Error {
  using Error::Error;
};

class ChartDomainError : public Error {
  using Error::Error;
};

class NotNormalizedError : public Error {
  using Error::Error;
};

class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

class NotCentralError : public Error {
  using Error::Error;
};

class IntegratorError : public Error {
  using Error::Error;
};

class UnresolvedCrossingError : public Error {
  using Error::Error;
};

class DegenerateCrossingError : public Error {
 public:
  DegenerateCrossingError(const std::string& what, double tau)
      : Error(what), tau_(tau) {}
  double tau() const { return tau_; }

 private:
  double tau_;
};

class MeshTooCoarseError : public Error {
 public:
  MeshTooCoarseError(const std::string& what, int coarse, int fine)
      : Error(what), coarse_(coarse), fine_(fine) {}
  int coarse_count() const { return coarse_; }
  int fine_count() const { return fine_; }

 private:
  int coarse_;
  int fine_;
};

// Raised when two routes that must agree on an integer index disagree.
class IndexMismatchError : public Error {
  using Error::Error;
};

class ConfigError : public Error {
  using Error::Error;
};

}  // namespace hmorse
