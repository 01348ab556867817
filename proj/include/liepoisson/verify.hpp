#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "liepoisson/poisson.hpp"
#include "liepoisson/state.hpp"

namespace liepoisson {

/// A numerical integrator x_{n+1} = apply(x_n, h).
struct OneStepMap {
  Eigen::Index dimension = 0;
  std::function<StateVector(const StateVector&, double)> apply;

  StateVector operator()(const StateVector& x, double h) const {
    StateVector y = apply(x, h);
    detail::require_dimension(y, dimension, "OneStepMap");
    return y;
  }
};

/// A trajectory produced a non-finite state.
class BlowUpError : public NonFiniteError {
 public:
  explicit BlowUpError(long step)
      : NonFiniteError("non-finite state at step " + std::to_string(step)),
        step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

inline constexpr double kDefaultFdEps = 1e-6;
/// Residual above which a map is reported as not Poisson.
inline constexpr double kPoissonResidualTolerance = 1e-6;
/// Area-form residual threshold for symplectic_residual_2d.
inline constexpr double kSymplecticResidualTolerance = 1e-9;
/// Drift threshold for observables that should be exactly conserved.
inline constexpr double kConservedDriftTolerance = 1e-12;

/// Jacobian of y -> map(y, h) at x by central differences with step fd_eps.
inline Matrix fd_jacobian(const OneStepMap& map, const StateVector& x, double h,
                          double fd_eps = kDefaultFdEps) {
  if (!(fd_eps > 0.0)) throw std::invalid_argument("fd_jacobian: fd_eps must be > 0");
  detail::require_dimension(x, map.dimension, "fd_jacobian");
  const Eigen::Index n = x.size();
  Matrix d(n, n);
  StateVector probe = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    // divide by the realized step so input rounding does not bias the quotient
    const double hi = x[j] + fd_eps;
    const double lo = x[j] - fd_eps;
    probe[j] = hi;
    const StateVector up = map(probe, h);
    probe[j] = lo;
    const StateVector down = map(probe, h);
    probe[j] = x[j];
    d.col(j) = (up - down) / (hi - lo);
  }
  if (!d.allFinite()) throw NonFiniteError("fd_jacobian: non-finite entries");
  return d;
}

/// max |D Pi(x) D^T - Pi(map(x, h))| with D the finite-difference Jacobian.
inline double poisson_residual(const PoissonSystem& system, const OneStepMap& map,
                               const StateVector& x, double h,
                               double fd_eps = kDefaultFdEps) {
  detail::require_dimension(x, system.dimension(), "poisson_residual");
  detail::require_dimension(x, map.dimension, "poisson_residual");
  const Matrix d = fd_jacobian(map, x, h, fd_eps);
  const Matrix lhs = d * structure_matrix(system, x) * d.transpose();
  const Matrix rhs = structure_matrix(system, map(x, h));
  return detail::max_abs(Matrix(lhs - rhs));
}

/// |det D - 1| for a planar map; zero iff dq ^ dp is preserved.
inline double symplectic_residual_2d(const OneStepMap& map, const StateVector& x,
                                     double h, double fd_eps = kDefaultFdEps) {
  if (map.dimension != 2 || x.size() != 2) {
    throw DimensionError("symplectic_residual_2d: requires dimension 2");
  }
  return std::abs(fd_jacobian(map, x, h, fd_eps).determinant() - 1.0);
}

struct DriftSample {
  long step;
  double t;
  double deviation;  // observable(x_n) - observable(x_0)
};

struct DriftReport {
  std::vector<DriftSample> samples;
  double max_abs_deviation = 0.0;
  double final_deviation = 0.0;
};

/// Iterates the map and records observable(x_n) - observable(x_0).
inline DriftReport drift(const OneStepMap& map, const ScalarField& observable,
                         const StateVector& x0, double h, long steps) {
  if (steps < 1) throw std::invalid_argument("drift: steps must be >= 1");
  detail::require_dimension(x0, map.dimension, "drift");
  DriftReport report;
  report.samples.reserve(static_cast<std::size_t>(steps));
  const double v0 = observable(x0);
  StateVector x = x0;
  for (long n = 1; n <= steps; ++n) {
    x = map(x, h);
    if (!x.allFinite()) throw BlowUpError(n);
    const double dev = observable(x) - v0;
    report.samples.push_back({n, static_cast<double>(n) * h, dev});
    report.max_abs_deviation = std::max(report.max_abs_deviation, std::abs(dev));
  }
  report.final_deviation = report.samples.back().deviation;
  return report;
}

struct OrderEstimate {
  std::vector<double> h_values;
  std::vector<double> errors;
  double slope = 0.0;   // +inf when the map reproduces the oracle
  bool exact = false;
};

/// Errors at or below this (scaled by max(1, |oracle|)) count as exact.
inline constexpr double kExactnessThreshold = 1e-12;

/// Least-squares slope of log(error) against log(h).
inline double log_log_slope(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(h[i]);
    my += std::log(e[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(h[i]) - mx;
    sxy += dx * (std::log(e[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

using Oracle = std::function<StateVector(const StateVector&, double)>;

/// Global error at time T for each h, and the fitted convergence slope.
inline OrderEstimate convergence_order(const OneStepMap& map, const Oracle& oracle,
                                       const StateVector& x0, double T,
                                       const std::vector<double>& h_values) {
  if (h_values.size() < 3) {
    throw std::invalid_argument("convergence_order: need at least 3 step sizes");
  }
  for (std::size_t i = 0; i < h_values.size(); ++i) {
    if (!(h_values[i] > 0.0) || (i > 0 && !(h_values[i] < h_values[i - 1]))) {
      throw std::invalid_argument("convergence_order: h values must be positive and decreasing");
    }
  }
  const StateVector reference = oracle(x0, T);
  const double scale = std::max(1.0, detail::max_abs(reference));

  OrderEstimate est;
  est.h_values = h_values;
  for (double h : h_values) {
    const double count = std::round(T / h);
    if (std::abs(count * h - T) > 1e-12 * std::max(1.0, std::abs(T))) {
      throw std::invalid_argument("convergence_order: h does not divide T");
    }
    StateVector x = x0;
    for (long n = 0; n < static_cast<long>(count); ++n) {
      x = map(x, h);
      if (!x.allFinite()) throw BlowUpError(n + 1);
    }
    est.errors.push_back(detail::max_abs(StateVector(x - reference)));
  }

  bool all_exact = true;
  for (double e : est.errors) all_exact = all_exact && e <= kExactnessThreshold * scale;
  if (all_exact) {
    est.exact = true;
    est.slope = std::numeric_limits<double>::infinity();
    return est;
  }
  for (double e : est.errors) {
    if (!(e > 0.0)) {
      throw std::domain_error("convergence_order: zero error at one step size only");
    }
  }
  est.slope = log_log_slope(est.h_values, est.errors);
  return est;
}

/// Step size at which the one-stage RK map is Poisson for
/// Pi = [[0, x2], [-x2, 0]], H = A x1 + B x2 + C: h = 1 / (2bA - aA).
/// Empty when 2bA - aA = 0.
inline std::optional<double> rk1_poisson_condition(double A, double /*B*/, double a,
                                                   double b) {
  const double denom = 2.0 * b * A - a * A;
  if (denom == 0.0) return std::nullopt;
  return 1.0 / denom;
}

// Seeded state sampling.

/// count states uniform in [lo, hi]^dimension.
inline std::vector<StateVector> sample_box(Eigen::Index dimension, int count,
                                           std::uint64_t seed, double lo = -1.0,
                                           double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<StateVector> out;
  for (int i = 0; i < count; ++i) {
    StateVector x(dimension);
    for (Eigen::Index j = 0; j < dimension; ++j) x[j] = u(rng);
    out.push_back(std::move(x));
  }
  return out;
}

/// count states with uniformly random direction and norm in [r_min, r_max].
inline std::vector<StateVector> sample_shell(Eigen::Index dimension, int count,
                                             std::uint64_t seed, double r_min,
                                             double r_max) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> radius(r_min, r_max);
  std::vector<StateVector> out;
  while (static_cast<int>(out.size()) < count) {
    StateVector x(dimension);
    for (Eigen::Index j = 0; j < dimension; ++j) x[j] = gauss(rng);
    const double nrm = x.norm();
    if (nrm < 1e-8) continue;
    out.push_back(x * (radius(rng) / nrm));
  }
  return out;
}

}  // namespace liepoisson
