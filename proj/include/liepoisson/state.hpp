#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace liepoisson {

using StateVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when an argument's length does not match the owning object's dimension.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterate, input or Jacobian contains NaN or Inf.
class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An implicit solve did not reach its tolerance.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what + " (residual " + std::to_string(residual) +
                           " after " + std::to_string(iterations) +
                           " iterations)"),
        residual_(residual),
        iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

namespace detail {

inline void require_dimension(const StateVector& x, Eigen::Index n,
                              const char* where) {
  if (x.size() != n) {
    throw DimensionError(std::string(where) + ": expected dimension " +
                         std::to_string(n) + ", got " +
                         std::to_string(x.size()));
  }
}

inline void require_finite(const StateVector& x, const char* where) {
  if (!x.allFinite()) {
    throw NonFiniteError(std::string(where) + ": non-finite entry");
  }
}

inline void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw NonFiniteError(std::string(where) + ": non-finite value");
  }
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double max_abs(const StateVector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace detail
}  // namespace liepoisson
