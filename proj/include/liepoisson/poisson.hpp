#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "liepoisson/state.hpp"

namespace liepoisson {

/// How gradients are obtained when a field has no analytic gradient.
struct GradientPolicy {
  bool allow_finite_differences = true;
  /// Per-coordinate step is relative_eps * max(1, |x_i|).
  double relative_eps = 1e-6;
};

/// A smooth function on the state space, with an optional analytic gradient.
struct ScalarField {
  std::function<double(const StateVector&)> eval;
  std::function<StateVector(const StateVector&)> gradient;

  double operator()(const StateVector& x) const { return eval(x); }
  bool has_gradient() const noexcept { return static_cast<bool>(gradient); }
};

/// Central-difference gradient with scale-aware steps.
inline StateVector finite_difference_gradient(const ScalarField& f,
                                              const StateVector& x,
                                              double relative_eps = 1e-6) {
  StateVector g(x.size());
  StateVector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = relative_eps * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double up = f.eval(probe);
    probe[i] = x[i] - step;
    const double down = f.eval(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

inline StateVector gradient_of(const ScalarField& f, const StateVector& x,
                               const GradientPolicy& policy = {}) {
  if (f.has_gradient()) return f.gradient(x);
  if (!policy.allow_finite_differences) {
    throw std::logic_error(
        "gradient unavailable and finite differences are disabled");
  }
  return finite_difference_gradient(f, x, policy.relative_eps);
}

/// A finite-dimensional Poisson system (R^n, Pi(x), H) with optional Casimirs.
///
/// Pi is supplied as a closed-form matrix function; it is checked for
/// antisymmetry on every evaluation. Immutable after construction.
class PoissonSystem {
 public:
  using StructureFn = std::function<Matrix(const StateVector&)>;

  PoissonSystem(Eigen::Index dimension, StructureFn structure,
                ScalarField hamiltonian, std::vector<ScalarField> casimirs = {},
                GradientPolicy policy = {})
      : dimension_(dimension),
        structure_(std::move(structure)),
        hamiltonian_(std::move(hamiltonian)),
        casimirs_(std::move(casimirs)),
        policy_(policy) {
    if (dimension_ < 1) {
      throw std::invalid_argument("PoissonSystem: dimension must be >= 1");
    }
    if (!structure_ || !hamiltonian_.eval) {
      throw std::invalid_argument(
          "PoissonSystem: structure and hamiltonian are required");
    }
  }

  Eigen::Index dimension() const noexcept { return dimension_; }
  const ScalarField& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<ScalarField>& casimirs() const noexcept { return casimirs_; }
  const GradientPolicy& gradient_policy() const noexcept { return policy_; }
  const StructureFn& structure_fn() const noexcept { return structure_; }

 private:
  Eigen::Index dimension_;
  StructureFn structure_;
  ScalarField hamiltonian_;
  std::vector<ScalarField> casimirs_;
  GradientPolicy policy_;
};

/// Largest antisymmetry defect tolerated for Pi(x), relative to max |Pi|.
inline constexpr double kAntisymmetryTolerance = 1e-14;

inline Matrix structure_matrix(const PoissonSystem& system,
                               const StateVector& x) {
  detail::require_dimension(x, system.dimension(), "structure_matrix");
  detail::require_finite(x, "structure_matrix");
  Matrix pi = system.structure_fn()(x);
  if (pi.rows() != system.dimension() || pi.cols() != system.dimension()) {
    throw DimensionError("structure_matrix: Pi has the wrong shape");
  }
  const double defect = detail::max_abs(Matrix(pi + pi.transpose()));
  if (defect > kAntisymmetryTolerance * std::max(1.0, detail::max_abs(pi))) {
    throw std::domain_error("structure_matrix: Pi is not antisymmetric");
  }
  return pi;
}

/// {f, g}(x) = grad f(x)^T Pi(x) grad g(x).
inline double poisson_bracket(const PoissonSystem& system, const ScalarField& f,
                              const ScalarField& g, const StateVector& x) {
  const Matrix pi = structure_matrix(system, x);
  const StateVector df = gradient_of(f, x, system.gradient_policy());
  const StateVector dg = gradient_of(g, x, system.gradient_policy());
  detail::require_dimension(df, system.dimension(), "poisson_bracket");
  detail::require_dimension(dg, system.dimension(), "poisson_bracket");
  return df.dot(pi * dg);
}

/// X_H(x) = Pi(x) grad H(x).
inline StateVector hamiltonian_vector_field(const PoissonSystem& system,
                                            const StateVector& x) {
  const Matrix pi = structure_matrix(system, x);
  const StateVector dh =
      gradient_of(system.hamiltonian(), x, system.gradient_policy());
  return pi * dh;
}

/// max |Pi(x) grad C(x)| over all declared Casimirs.
inline double casimir_annihilation_residual(const PoissonSystem& system,
                                            const StateVector& x) {
  const Matrix pi = structure_matrix(system, x);
  double worst = 0.0;
  for (const auto& c : system.casimirs()) {
    worst = std::max(
        worst, detail::max_abs(StateVector(
                   pi * gradient_of(c, x, system.gradient_policy()))));
  }
  return worst;
}

// Shipped systems.

/// Canonical symplectic system on R^{2m}: x = (q, p), Pi = [[0, I], [-I, 0]].
inline PoissonSystem make_canonical_system(Eigen::Index half_dimension,
                                           ScalarField hamiltonian) {
  const Eigen::Index n = 2 * half_dimension;
  Matrix pi = Matrix::Zero(n, n);
  pi.topRightCorner(half_dimension, half_dimension).setIdentity();
  pi.bottomLeftCorner(half_dimension, half_dimension) =
      -Matrix::Identity(half_dimension, half_dimension);
  return PoissonSystem(
      n, [pi](const StateVector&) { return pi; }, std::move(hamiltonian));
}

/// q' = p, p' = -q with H = (q^2 + p^2) / 2.
inline PoissonSystem make_harmonic_oscillator() {
  ScalarField h{
      [](const StateVector& x) { return 0.5 * x.squaredNorm(); },
      [](const StateVector& x) -> StateVector { return x; }};
  return make_canonical_system(1, std::move(h));
}

/// Planar system with Pi = [[0, x2], [-x2, 0]] and affine H = A x1 + B x2 + C.
inline PoissonSystem make_affine_planar_system(double a_coef, double b_coef,
                                               double c_coef = 0.0) {
  ScalarField h{
      [=](const StateVector& x) { return a_coef * x[0] + b_coef * x[1] + c_coef; },
      [=](const StateVector&) -> StateVector {
        return Eigen::Vector2d(a_coef, b_coef);
      }};
  return PoissonSystem(
      2,
      [](const StateVector& x) -> Matrix {
        Eigen::Matrix2d pi;
        pi << 0.0, x[1], -x[1], 0.0;
        return pi;
      },
      std::move(h));
}

}  // namespace liepoisson
