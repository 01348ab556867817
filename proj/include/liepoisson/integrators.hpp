#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "liepoisson/poisson.hpp"
#include "liepoisson/state.hpp"

namespace liepoisson {

/// Right-hand side f of an autonomous ODE x' = f(x).
struct VectorField {
  Eigen::Index dimension = 0;
  std::function<StateVector(const StateVector&)> eval;

  StateVector operator()(const StateVector& x) const {
    StateVector y = eval(x);
    detail::require_dimension(y, dimension, "VectorField");
    return y;
  }
};

/// x' = Pi(x) grad H(x) for a Poisson system.
inline VectorField hamiltonian_field(const PoissonSystem& system) {
  return VectorField{system.dimension(), [system](const StateVector& x) {
                       return hamiltonian_vector_field(system, x);
                     }};
}

enum class SolverStrategy { fixed_point, newton_fd };

struct ImplicitSolverConfig {
  double tolerance = 1e-12;
  int max_iterations = 100;
  SolverStrategy strategy = SolverStrategy::fixed_point;

  void validate() const {
    if (!(tolerance > 0.0 && tolerance < 1.0)) {
      throw std::invalid_argument("ImplicitSolverConfig: tolerance must lie in (0, 1)");
    }
    if (max_iterations < 1) {
      throw std::invalid_argument("ImplicitSolverConfig: max_iterations must be >= 1");
    }
  }
};

namespace detail {

/// Solves y = g(y) per cfg, starting from `y`.
///
/// Iteration stops when successive iterates differ by at most cfg.tolerance
/// in max-norm; the defining relation is then re-checked, allowing a few ulps
/// of roundoff on top of the tolerance.
template <class FixedPointMap>
StateVector solve_implicit(FixedPointMap&& g, StateVector y,
                           const ImplicitSolverConfig& cfg, const char* what) {
  cfg.validate();
  const Eigen::Index n = y.size();
  int iterations = 0;
  bool settled = false;
  auto floor_of = [](const StateVector& v) {
    return 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, max_abs(v));
  };

  if (cfg.strategy == SolverStrategy::fixed_point) {
    while (iterations < cfg.max_iterations) {
      ++iterations;
      StateVector next = g(y);
      if (!next.allFinite()) break;
      const double delta = max_abs(StateVector(next - y));
      y = std::move(next);
      if (delta <= std::max(cfg.tolerance, floor_of(y))) {
        settled = true;
        break;
      }
    }
  } else {
    Matrix jac(n, n);
    while (iterations < cfg.max_iterations) {
      ++iterations;
      const StateVector r = y - g(y);
      StateVector probe = y;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double step = 1e-7 * std::max(1.0, std::abs(y[j]));
        probe[j] = y[j] + step;
        const StateVector up = probe - g(probe);
        probe[j] = y[j] - step;
        const StateVector down = probe - g(probe);
        probe[j] = y[j];
        jac.col(j) = (up - down) / (2.0 * step);
      }
      const StateVector dy = jac.partialPivLu().solve(r);
      if (!dy.allFinite()) break;
      y -= dy;
      if (max_abs(dy) <= std::max(cfg.tolerance, floor_of(y))) {
        settled = true;
        break;
      }
    }
  }

  const double residual = y.allFinite() ? max_abs(StateVector(g(y) - y))
                                        : std::numeric_limits<double>::infinity();
  if (!settled || !(residual <= std::max(cfg.tolerance, floor_of(y)))) {
    throw NonConvergenceError(std::string(what) + ": implicit solve failed",
                              residual, iterations);
  }
  return y;
}

inline void check_step(const VectorField& f, const StateVector& x, double h,
                       const char* what) {
  require_dimension(x, f.dimension, what);
  require_finite(x, what);
  require_finite(h, what);
}

}  // namespace detail

/// x + h f(x).
inline StateVector explicit_euler_step(const VectorField& f, const StateVector& x,
                                       double h) {
  detail::check_step(f, x, h, "explicit_euler_step");
  return x + h * f(x);
}

/// Solves y = x + h (f(x) + f(y)). There is no 1/2 on the right-hand side;
/// see trapezoid_step for the averaged variant.
inline StateVector modified_euler_step(const VectorField& f, const StateVector& x,
                                       double h, const ImplicitSolverConfig& cfg = {}) {
  detail::check_step(f, x, h, "modified_euler_step");
  const StateVector fx = f(x);
  return detail::solve_implicit(
      [&](const StateVector& y) -> StateVector { return x + h * (fx + f(y)); },
      StateVector(x + 2.0 * h * fx), cfg, "modified_euler_step");
}

/// Solves y = x + (h/2) (f(x) + f(y)).
inline StateVector trapezoid_step(const VectorField& f, const StateVector& x,
                                  double h, const ImplicitSolverConfig& cfg = {}) {
  detail::check_step(f, x, h, "trapezoid_step");
  const StateVector fx = f(x);
  return detail::solve_implicit(
      [&](const StateVector& y) -> StateVector {
        return x + 0.5 * h * (fx + f(y));
      },
      StateVector(x + h * fx), cfg, "trapezoid_step");
}

/// Implicit midpoint: solves y = x + h f((x + y) / 2).
inline StateVector gauss_legendre_step(const VectorField& f, const StateVector& x,
                                       double h, const ImplicitSolverConfig& cfg = {}) {
  detail::check_step(f, x, h, "gauss_legendre_step");
  return detail::solve_implicit(
      [&](const StateVector& y) -> StateVector {
        return x + h * f(StateVector(0.5 * (x + y)));
      },
      StateVector(x + h * f(x)), cfg, "gauss_legendre_step");
}

/// Dense s-stage Butcher tableau (a, b). Nodes c are implied by the
/// autonomous setting and not stored.
class ButcherTableau {
 public:
  ButcherTableau(Matrix a, StateVector b, std::string name = "custom")
      : a_(std::move(a)), b_(std::move(b)), name_(std::move(name)) {
    if (b_.size() < 1 || a_.rows() != b_.size() || a_.cols() != b_.size()) {
      throw DimensionError("ButcherTableau: a must be s x s and b of length s >= 1");
    }
    if (!a_.allFinite() || !b_.allFinite()) {
      throw NonFiniteError("ButcherTableau: non-finite coefficient");
    }
  }

  Eigen::Index stages() const noexcept { return b_.size(); }
  const Matrix& a() const noexcept { return a_; }
  const StateVector& b() const noexcept { return b_; }
  const std::string& name() const noexcept { return name_; }

  /// a_ij == 0 for every j >= i.
  bool is_explicit() const {
    for (Eigen::Index i = 0; i < stages(); ++i)
      for (Eigen::Index j = i; j < stages(); ++j)
        if (a_(i, j) != 0.0) return false;
    return true;
  }

  /// sum b_i == 1. Inconsistent tableaux are allowed; callers may warn.
  bool is_consistent(double tol = 1e-14) const {
    return std::abs(b_.sum() - 1.0) <= tol;
  }

 private:
  Matrix a_;
  StateVector b_;
  std::string name_;
};

namespace tableaus {

inline ButcherTableau euler() {
  return ButcherTableau(Matrix::Zero(1, 1), StateVector::Ones(1), "euler");
}

inline ButcherTableau midpoint() {
  return ButcherTableau(Matrix::Constant(1, 1, 0.5), StateVector::Ones(1),
                        "midpoint");
}

inline ButcherTableau rk4() {
  Matrix a = Matrix::Zero(4, 4);
  a(1, 0) = 0.5;
  a(2, 1) = 0.5;
  a(3, 2) = 1.0;
  StateVector b(4);
  b << 1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0;
  return ButcherTableau(std::move(a), std::move(b), "rk4");
}

/// Two-stage trapezoidal rule (Lobatto IIIA).
inline ButcherTableau trapezoid() {
  Matrix a(2, 2);
  a << 0.0, 0.0, 0.5, 0.5;
  return ButcherTableau(std::move(a), StateVector::Constant(2, 0.5), "trapezoid");
}

inline std::optional<ButcherTableau> by_name(std::string_view name) {
  if (name == "euler") return euler();
  if (name == "midpoint") return midpoint();
  if (name == "rk4") return rk4();
  if (name == "trapezoid") return trapezoid();
  return std::nullopt;
}

}  // namespace tableaus

/// One Runge-Kutta step: X_i = x + h sum_j a_ij f(X_j), x' = x + h sum_i b_i f(X_i).
///
/// Strictly lower-triangular tableaux are evaluated by forward substitution;
/// anything else solves the stacked stage system per cfg.
inline StateVector rk_step(const VectorField& f, const ButcherTableau& tab,
                           const StateVector& x, double h,
                           const ImplicitSolverConfig& cfg = {}) {
  detail::check_step(f, x, h, "rk_step");
  const Eigen::Index s = tab.stages();
  const Eigen::Index n = x.size();
  const Matrix& a = tab.a();
  const StateVector& b = tab.b();

  Matrix k(n, s);  // column i holds f(X_i)
  if (tab.is_explicit()) {
    for (Eigen::Index i = 0; i < s; ++i) {
      StateVector stage = x;
      for (Eigen::Index j = 0; j < i; ++j) {
        if (a(i, j) != 0.0) stage += h * a(i, j) * k.col(j);
      }
      k.col(i) = f(stage);
    }
  } else {
    auto stage_map = [&](const StateVector& z) -> StateVector {
      Matrix fz(n, s);
      for (Eigen::Index j = 0; j < s; ++j) fz.col(j) = f(z.segment(j * n, n));
      StateVector out(n * s);
      for (Eigen::Index i = 0; i < s; ++i) {
        out.segment(i * n, n) = x + h * (fz * a.row(i).transpose());
      }
      return out;
    };
    StateVector z0(n * s);
    for (Eigen::Index i = 0; i < s; ++i) z0.segment(i * n, n) = x;
    const StateVector z = detail::solve_implicit(stage_map, std::move(z0), cfg, "rk_step");
    for (Eigen::Index i = 0; i < s; ++i) k.col(i) = f(z.segment(i * n, n));
  }
  return x + h * (k * b);
}

/// Entry (i, j) = b_i a_ij + b_j a_ji - b_i b_j. Symmetric by construction.
inline Matrix symplectic_condition_residual(const ButcherTableau& tab) {
  const Eigen::Index s = tab.stages();
  const Matrix& a = tab.a();
  const StateVector& b = tab.b();
  Matrix r(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      r(i, j) = (b[i] * a(i, j) + b[j] * a(j, i)) - b[i] * b[j];
  return r;
}

/// Threshold on max |residual| for a tableau to count as symplectic.
inline constexpr double kSymplecticTableauTolerance = 1e-14;

inline bool satisfies_symplectic_condition(const ButcherTableau& tab) {
  return detail::max_abs(symplectic_condition_residual(tab)) <=
         kSymplecticTableauTolerance;
}

using PlanarPoint = std::array<double, 2>;

/// Ruth map for q' = p, p' = -q:
///   (x1, x2) -> (x1 + h x2, -h x1 + (1 - h^2) x2).
constexpr PlanarPoint ruth_step(const PlanarPoint& x, double h) noexcept {
  return {x[0] + h * x[1], -h * x[0] + (1.0 - h * h) * x[1]};
}

}  // namespace liepoisson
