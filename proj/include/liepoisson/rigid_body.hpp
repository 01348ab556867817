#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "liepoisson/integrators.hpp"
#include "liepoisson/poisson.hpp"
#include "liepoisson/splitting.hpp"
#include "liepoisson/state.hpp"

namespace liepoisson {

/// Inertia of a symmetric free rigid body, I1 = I2 > I3 > 0.
class RigidBodyParams {
 public:
  RigidBodyParams(double i1, double i3) : i1_(i1), i3_(i3) {
    if (!std::isfinite(i1) || !std::isfinite(i3) || !(i1 > i3 && i3 > 0.0)) {
      throw std::invalid_argument("RigidBodyParams: require I1 > I3 > 0");
    }
  }

  double i1() const noexcept { return i1_; }
  double i3() const noexcept { return i3_; }

 private:
  double i1_;
  double i3_;
};

/// Angular momentum (m1, m2, m3) in body coordinates.
using RigidBodyState = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// a1 = 1/I3 - 1/I1, strictly positive.
inline double coefficient_a1(const RigidBodyParams& p) noexcept {
  return 1.0 / p.i3() - 1.0 / p.i1();
}

/// (a1 m2 m3, -a1 m1 m3, 0).
inline RigidBodyState euler_rhs(const RigidBodyParams& p,
                                const RigidBodyState& m) noexcept {
  const double a1 = coefficient_a1(p);
  return {a1 * m[1] * m[2], -a1 * m[0] * m[2], 0.0};
}

inline double hamiltonian(const RigidBodyParams& p, const RigidBodyState& m) noexcept {
  return 0.5 * ((m[0] * m[0] + m[1] * m[1]) / p.i1() + m[2] * m[2] / p.i3());
}

inline double casimir(const RigidBodyState& m) noexcept {
  return 0.5 * m.squaredNorm();
}

/// Lie-Poisson structure of so(3)*: Pi(m) v = m x v.
inline Matrix3 rigid_body_structure(const RigidBodyState& m) noexcept {
  Matrix3 pi;
  pi << 0.0, -m[2], m[1],
        m[2], 0.0, -m[0],
        -m[1], m[0], 0.0;
  return pi;
}

// Rotation matrices of the three exact flows, sign conventions as in the
// displayed propagators M, N, P.

inline Matrix3 rotation_axis1(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix3 r;
  r << 1.0, 0.0, 0.0,
       0.0, c, s,
       0.0, -s, c;
  return r;
}

inline Matrix3 rotation_axis2(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix3 r;
  r << c, 0.0, -s,
       0.0, 1.0, 0.0,
       s, 0.0, c;
  return r;
}

inline Matrix3 rotation_axis3(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Matrix3 r;
  r << c, s, 0.0,
       -s, c, 0.0,
       0.0, 0.0, 1.0;
  return r;
}

/// Exact flow of H1 = m1^2 / (2 I1): m1 fixed, (m2, m3) rotated by (m1/I1) t.
inline RigidBodyState flow_axis1(const RigidBodyParams& p, const RigidBodyState& m,
                                 double t) {
  const double angle = m[0] / p.i1() * t;
  const double c = std::cos(angle), s = std::sin(angle);
  return {m[0], c * m[1] + s * m[2], -s * m[1] + c * m[2]};
}

/// Exact flow of H2 = m2^2 / (2 I1): m2 fixed, (m1, m3) rotated by (m2/I1) t.
inline RigidBodyState flow_axis2(const RigidBodyParams& p, const RigidBodyState& m,
                                 double t) {
  const double angle = m[1] / p.i1() * t;
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * m[0] - s * m[2], m[1], s * m[0] + c * m[2]};
}

/// Exact flow of H3 = m3^2 / (2 I3): m3 fixed, (m1, m2) rotated by (m3/I3) t.
inline RigidBodyState flow_axis3(const RigidBodyParams& p, const RigidBodyState& m,
                                 double t) {
  const double angle = m[2] / p.i3() * t;
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * m[0] + s * m[1], -s * m[0] + c * m[1], m[2]};
}

/// M, N, P evaluated at one state, and R = M N P.
struct StepPropagator {
  Matrix3 M;
  Matrix3 N;
  Matrix3 P;
  Matrix3 R;
};

inline StepPropagator step_propagator(const RigidBodyParams& p,
                                      const RigidBodyState& m, double h) {
  StepPropagator out{rotation_axis1(h * m[0] / p.i1()),
                     rotation_axis2(h * m[1] / p.i1()),
                     rotation_axis3(h * m[2] / p.i3()), Matrix3()};
  out.R = out.M * out.N * out.P;
  return out;
}

/// One Lie-Trotter step for the symmetric rigid body.
///
/// Default: axis-1, axis-2 then axis-3 flows for time h, each angle taken
/// from that flow's own input. frozen = true applies R = M N P built from
/// the input state instead.
inline RigidBodyState lie_trotter_rigid_step(const RigidBodyParams& p,
                                             const RigidBodyState& m, double h,
                                             bool frozen = false) {
  if (frozen) return step_propagator(p, m, h).R * m;
  return flow_axis3(p, flow_axis2(p, flow_axis1(p, m, h), h), h);
}

/// Closed-form solution: m3 constant, (m1, m2) rotating at rate a1 m3.
inline RigidBodyState exact_solution(const RigidBodyParams& p,
                                     const RigidBodyState& m0, double t) {
  const double w = coefficient_a1(p) * m0[2] * t;
  const double c = std::cos(w), s = std::sin(w);
  return {c * m0[0] + s * m0[1], -s * m0[0] + c * m0[1], m0[2]};
}

// Coadjoint orbits.

struct OrbitSpec {
  double k;  // ||m||
};

inline OrbitSpec orbit_of(const RigidBodyState& m) noexcept { return {m.norm()}; }

inline constexpr double kTangencyTolerance = 1e-10;

/// Kirillov-Kostant-Souriau form on the orbit through m, evaluated on
/// tangent vectors u, v.
inline double kks_form(const RigidBodyState& m, const RigidBodyState& u,
                       const RigidBodyState& v) {
  const double k = m.norm();
  if (!(k > 0.0)) throw std::domain_error("kks_form: m = 0 lies on no orbit");
  if (std::abs(u.dot(m)) > kTangencyTolerance * std::max(1.0, u.norm() * k) ||
      std::abs(v.dot(m)) > kTangencyTolerance * std::max(1.0, v.norm() * k)) {
    throw std::invalid_argument("kks_form: u and v must be tangent to the orbit");
  }
  return (m[1] * (u[0] * v[2] - u[2] * v[0]) - m[2] * (u[0] * v[1] - u[1] * v[0]) -
          m[0] * (u[1] * v[2] - u[2] * v[1])) /
         k;
}

// Characteristic roots of R.

enum class RootMethod { characteristic_polynomial, rotation_angle };

struct CharacteristicRoots {
  std::array<std::complex<double>, 3> roots;  // ascending argument
  std::array<double, 3> moduli;
  std::complex<double> product;
  RootMethod method;
};

namespace detail {

/// Real roots of x^3 + a x^2 + b x + c, Newton-polished. Returns one or three.
inline std::vector<double> real_cubic_roots(double a, double b, double c) {
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> roots;
  if (disc < 0.0) {
    const double r = std::sqrt(-p / 3.0);
    const double phi = std::acos(std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0));
    for (int k = 0; k < 3; ++k)
      roots.push_back(2.0 * r * std::cos((phi - 2.0 * M_PI * k) / 3.0) - shift);
  } else {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - shift);
  }
  for (double& x : roots) {
    for (int it = 0; it < 8; ++it) {
      const double f = ((x + a) * x + b) * x + c;
      const double df = (3.0 * x + 2.0 * a) * x + b;
      if (df == 0.0) break;
      const double dx = f / df;
      x -= dx;
      if (std::abs(dx) <= 1e-17 * std::max(1.0, std::abs(x))) break;
    }
  }
  return roots;
}

inline bool is_rotation(const Matrix3& r, double tol = 1e-12) {
  return max_abs(Matrix(r.transpose() * r - Matrix3::Identity())) <= tol &&
         std::abs(r.determinant() - 1.0) <= tol;
}

/// Below this root separation the polynomial route loses accuracy
/// (error ~ eps / separation^2), so rotations switch to the angle formula.
inline constexpr double kRootSeparationFloor = 1e-2;

}  // namespace detail

/// Eigenvalues of prop.R from its characteristic polynomial
///   l^3 - tr(R) l^2 + c1 l - det(R).
/// Rotations whose roots cluster fall back to {1, exp(+-i theta)} with
/// theta from trace and skew part.
inline CharacteristicRoots characteristic_roots(const StepPropagator& prop) {
  using cd = std::complex<double>;
  const Matrix3& r = prop.R;
  const double tr = r.trace();
  const double c1 = r(0, 0) * r(1, 1) - r(0, 1) * r(1, 0) +
                    r(0, 0) * r(2, 2) - r(0, 2) * r(2, 0) +
                    r(1, 1) * r(2, 2) - r(1, 2) * r(2, 1);
  const double det = r.determinant();

  std::array<cd, 3> roots;
  const auto real = detail::real_cubic_roots(-tr, c1, -det);
  if (real.size() == 3) {
    roots = {cd(real[0]), cd(real[1]), cd(real[2])};
  } else {
    const double x = real[0];
    const double beta = x - tr;
    const double gamma = std::abs(x) > 1e-8 ? det / x : c1 + x * beta;
    const double d = beta * beta - 4.0 * gamma;
    if (d >= 0.0) {
      const double sq = std::sqrt(d);
      roots = {cd(x), cd(0.5 * (-beta - sq)), cd(0.5 * (-beta + sq))};
    } else {
      const double sq = std::sqrt(-d);
      roots = {cd(x), cd(-0.5 * beta, -0.5 * sq), cd(-0.5 * beta, 0.5 * sq)};
    }
  }

  RootMethod method = RootMethod::characteristic_polynomial;
  double separation = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (int i = 0; i < 3; ++i) {
    finite = finite && std::isfinite(roots[i].real()) && std::isfinite(roots[i].imag());
    for (int j = i + 1; j < 3; ++j)
      separation = std::min(separation, std::abs(roots[i] - roots[j]));
  }
  if ((!finite || separation < detail::kRootSeparationFloor) &&
      detail::is_rotation(r)) {
    const Eigen::Vector3d axial(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0),
                                r(1, 0) - r(0, 1));
    const double theta = std::atan2(0.5 * axial.norm(), 0.5 * (tr - 1.0));
    roots = {std::polar(1.0, -theta), cd(1.0), std::polar(1.0, theta)};
    method = RootMethod::rotation_angle;
  } else if (!finite) {
    throw std::runtime_error("characteristic_roots: root finding failed");
  }

  std::stable_sort(roots.begin(), roots.end(),
                   [](const cd& x, const cd& y) { return std::arg(x) < std::arg(y); });
  CharacteristicRoots out{roots, {}, roots[0] * roots[1] * roots[2], method};
  for (int i = 0; i < 3; ++i) out.moduli[i] = std::abs(roots[i]);
  return out;
}

// Adapters onto the generic machinery.

inline PoissonSystem make_rigid_body_system(const RigidBodyParams& p) {
  ScalarField h{
      [p](const StateVector& x) { return hamiltonian(p, x.head<3>()); },
      [p](const StateVector& x) -> StateVector {
        return Eigen::Vector3d(x[0] / p.i1(), x[1] / p.i1(), x[2] / p.i3());
      }};
  ScalarField c{[](const StateVector& x) { return casimir(x.head<3>()); },
                [](const StateVector& x) -> StateVector { return x; }};
  return PoissonSystem(
      3, [](const StateVector& x) -> Matrix { return rigid_body_structure(x.head<3>()); },
      std::move(h), {std::move(c)});
}

inline VectorField rigid_body_field(const RigidBodyParams& p) {
  return VectorField{3, [p](const StateVector& x) -> StateVector {
                       return euler_rhs(p, x.head<3>());
                     }};
}

/// The three axis flows in the order axis 1, 2, 3.
inline SplitScheme make_rigid_body_scheme(const RigidBodyParams& p, int order_target = 1) {
  auto wrap = [p](RigidBodyState (*flow)(const RigidBodyParams&, const RigidBodyState&,
                                         double)) {
    return ExactFlow{3, [p, flow](const StateVector& x, double t) -> StateVector {
                       return flow(p, x.head<3>(), t);
                     }};
  };
  return SplitScheme({wrap(&flow_axis1), wrap(&flow_axis2), wrap(&flow_axis3)},
                     order_target);
}

}  // namespace liepoisson
