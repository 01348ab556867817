#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liepoisson/poisson.hpp"
#include "liepoisson/rigid_body.hpp"
#include "liepoisson/verify.hpp"

namespace lp = liepoisson;

namespace {

lp::StateVector vec(std::initializer_list<double> v) {
  lp::StateVector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

// Polynomial fields with analytic gradients, used for bracket properties.
lp::ScalarField poly_f() {
  return {[](const lp::StateVector& x) { return x[0] * x[1] + x[2] * x[2] * x[2]; },
          [](const lp::StateVector& x) -> lp::StateVector {
            return vec({x[1], x[0], 3.0 * x[2] * x[2]});
          }};
}

lp::ScalarField poly_g() {
  return {[](const lp::StateVector& x) { return x[0] * x[0] - 2.0 * x[1] * x[2] + x[2]; },
          [](const lp::StateVector& x) -> lp::StateVector {
            return vec({2.0 * x[0], -2.0 * x[2], -2.0 * x[1] + 1.0});
          }};
}

lp::ScalarField poly_k() {
  return {[](const lp::StateVector& x) { return x[1] * x[1] * x[0] + x[2]; },
          [](const lp::StateVector& x) -> lp::StateVector {
            return vec({x[1] * x[1], 2.0 * x[0] * x[1], 1.0});
          }};
}

lp::ScalarField product(const lp::ScalarField& f, const lp::ScalarField& g) {
  return {[f, g](const lp::StateVector& x) { return f(x) * g(x); },
          [f, g](const lp::StateVector& x) -> lp::StateVector {
            return f(x) * g.gradient(x) + g(x) * f.gradient(x);
          }};
}

lp::ScalarField coordinate(Eigen::Index i) {
  return {[i](const lp::StateVector& x) { return x[i]; },
          [i](const lp::StateVector& x) -> lp::StateVector {
            return lp::StateVector::Unit(x.size(), i);
          }};
}

const lp::RigidBodyParams kBody(2.0, 1.0);

}  // namespace

TEST(StructureMatrix, RigidBodyAtOneTwoThree) {
  const auto sys = lp::make_rigid_body_system(kBody);
  lp::Matrix expected(3, 3);
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(lp::structure_matrix(sys, vec({1, 2, 3})), expected);
}

TEST(StructureMatrix, ZeroStructure) {
  lp::PoissonSystem sys(
      2, [](const lp::StateVector&) -> lp::Matrix { return lp::Matrix::Zero(2, 2); },
      {[](const lp::StateVector& x) { return x.sum(); }, {}});
  EXPECT_EQ(lp::structure_matrix(sys, vec({4, -7})), lp::Matrix::Zero(2, 2));
}

TEST(StructureMatrix, AffinePlanarSystem) {
  const auto sys = lp::make_affine_planar_system(1.0, 2.0, 3.0);
  lp::Matrix expected(2, 2);
  expected << 0, 7, -7, 0;
  EXPECT_EQ(lp::structure_matrix(sys, vec({5, 7})), expected);
}

TEST(StructureMatrix, RejectsBadInput) {
  const auto sys = lp::make_rigid_body_system(kBody);
  EXPECT_THROW(lp::structure_matrix(sys, vec({1, 2})), lp::DimensionError);
  EXPECT_THROW(lp::structure_matrix(sys, vec({1, NAN, 0})), lp::NonFiniteError);

  lp::PoissonSystem lopsided(
      2,
      [](const lp::StateVector&) -> lp::Matrix {
        lp::Matrix m(2, 2);
        m << 0, 1, 1, 0;
        return m;
      },
      {[](const lp::StateVector&) { return 0.0; }, {}});
  EXPECT_THROW(lp::structure_matrix(lopsided, vec({0, 0})), std::domain_error);
}

TEST(PoissonBracket, SelfBracketVanishes) {
  const auto sys = lp::make_rigid_body_system(kBody);
  // finite-difference gradients on purpose
  lp::ScalarField f{[](const lp::StateVector& x) { return std::sin(x[0]) * x[1] + x[2] * x[2]; }, {}};
  for (const auto& x : lp::sample_box(3, 20, 7)) {
    EXPECT_NEAR(lp::poisson_bracket(sys, f, f, x), 0.0, 1e-12);
  }
}

TEST(PoissonBracket, CoordinateBracket) {
  const auto sys = lp::make_rigid_body_system(kBody);
  EXPECT_DOUBLE_EQ(lp::poisson_bracket(sys, coordinate(0), coordinate(1), vec({0, 0, 1})), -1.0);
}

TEST(PoissonBracket, HamiltonianCommutesWithCasimir) {
  const auto sys = lp::make_rigid_body_system(kBody);
  EXPECT_NEAR(lp::poisson_bracket(sys, sys.hamiltonian(), sys.casimirs().front(), vec({1, 1, 1})),
              0.0, 1e-10);
}

TEST(PoissonBracket, DimensionMismatch) {
  const auto sys = lp::make_rigid_body_system(kBody);
  EXPECT_THROW(lp::poisson_bracket(sys, poly_f(), poly_g(), vec({1, 1})), lp::DimensionError);
}

TEST(HamiltonianVectorField, RigidBodyExamples) {
  const auto sys = lp::make_rigid_body_system(kBody);
  const lp::StateVector v = lp::hamiltonian_vector_field(sys, vec({1, 0, 1}));
  EXPECT_NEAR(v[0], 0.0, 1e-15);
  EXPECT_NEAR(v[1], -0.5, 1e-15);
  EXPECT_NEAR(v[2], 0.0, 1e-15);
  EXPECT_EQ(lp::hamiltonian_vector_field(sys, vec({0, 0, 3.5})), lp::StateVector::Zero(3));
  EXPECT_EQ(lp::hamiltonian_vector_field(sys, vec({1, 0, 0})), lp::StateVector::Zero(3));
}

TEST(HamiltonianVectorField, GradientUnavailable) {
  lp::GradientPolicy strict;
  strict.allow_finite_differences = false;
  lp::PoissonSystem sys(
      2, [](const lp::StateVector&) -> lp::Matrix { return lp::Matrix::Zero(2, 2); },
      {[](const lp::StateVector& x) { return x.sum(); }, {}}, {}, strict);
  EXPECT_THROW(lp::hamiltonian_vector_field(sys, vec({1, 2})), std::logic_error);
}

// Property checks at seeded random states.

TEST(PoissonProperties, Antisymmetry) {
  const auto sys = lp::make_rigid_body_system(kBody);
  for (const auto& x : lp::sample_box(3, 1000, 11, -5.0, 5.0)) {
    const lp::Matrix pi = lp::structure_matrix(sys, x);
    EXPECT_LE((pi + pi.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PoissonProperties, CasimirAnnihilation) {
  const auto sys = lp::make_rigid_body_system(kBody);
  // same check with a finite-difference Casimir gradient
  lp::PoissonSystem fd_sys(
      3, sys.structure_fn(), sys.hamiltonian(),
      {lp::ScalarField{[](const lp::StateVector& x) { return 0.5 * x.squaredNorm(); }, {}}});
  for (const auto& x : lp::sample_box(3, 200, 12, -2.0, 2.0)) {
    EXPECT_LE(lp::casimir_annihilation_residual(sys, x), 1e-10);
    // central-difference rounding: about eps_mach * |C| / step per gradient entry
    const double step = 1e-6 * std::max(1.0, x.cwiseAbs().maxCoeff());
    const double floor = 8.0 * 2.2e-16 * (1.0 + 0.5 * x.squaredNorm()) / step * x.cwiseAbs().sum();
    EXPECT_LE(lp::casimir_annihilation_residual(fd_sys, x), std::max(1e-10, floor));
  }
}

TEST(PoissonProperties, BracketAntisymmetryAndLeibniz) {
  const auto sys = lp::make_rigid_body_system(kBody);
  const auto f = poly_f(), g = poly_g(), k = poly_k();
  const auto fg = product(f, g);
  for (const auto& x : lp::sample_box(3, 200, 13, -2.0, 2.0)) {
    EXPECT_LE(std::abs(lp::poisson_bracket(sys, f, g, x) + lp::poisson_bracket(sys, g, f, x)),
              1e-12);
    const double leibniz = lp::poisson_bracket(sys, fg, k, x) -
                           f(x) * lp::poisson_bracket(sys, g, k, x) -
                           g(x) * lp::poisson_bracket(sys, f, k, x);
    EXPECT_LE(std::abs(leibniz), 1e-8);
  }
}

TEST(PoissonProperties, JacobiIdentityForShippedSystems) {
  // {x_i, {x_j, x_k}} + cyclic = 0 with Pi linear: check via coordinate fields
  const auto rigid = lp::make_rigid_body_system(kBody);
  const auto planar = lp::make_affine_planar_system(1.0, 1.0);
  auto jacobi = [](const lp::PoissonSystem& sys, const lp::StateVector& x) {
    const Eigen::Index n = sys.dimension();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) {
          auto bracket_field = [&sys](Eigen::Index a, Eigen::Index b) {
            return lp::ScalarField{[&sys, a, b](const lp::StateVector& y) {
                                     return lp::structure_matrix(sys, y)(a, b);
                                   },
                                   {}};
          };
          const double s = lp::poisson_bracket(sys, coordinate(i), bracket_field(j, k), x) +
                           lp::poisson_bracket(sys, coordinate(j), bracket_field(k, i), x) +
                           lp::poisson_bracket(sys, coordinate(k), bracket_field(i, j), x);
          worst = std::max(worst, std::abs(s));
        }
    return worst;
  };
  for (const auto& x : lp::sample_box(3, 10, 14)) EXPECT_LE(jacobi(rigid, x), 1e-8);
  for (const auto& x : lp::sample_box(2, 10, 15)) EXPECT_LE(jacobi(planar, x), 1e-8);
}

TEST(PoissonProperties, VectorFieldMatchesEulerEquations) {
  const auto sys = lp::make_rigid_body_system(kBody);
  for (const auto& x : lp::sample_box(3, 500, 16, -3.0, 3.0)) {
    const lp::StateVector v = lp::hamiltonian_vector_field(sys, x);
    const lp::RigidBodyState e = lp::euler_rhs(kBody, x.head<3>());
    EXPECT_LE((v - e).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ScalarField, AnalyticGradientMatchesFiniteDifferences) {
  const auto sys = lp::make_rigid_body_system(kBody);
  for (const auto* field : {&sys.hamiltonian(), &sys.casimirs().front()}) {
    for (const auto& x : lp::sample_box(3, 50, 17, -2.0, 2.0)) {
      const lp::StateVector exact = field->gradient(x);
      const lp::StateVector fd = lp::finite_difference_gradient(*field, x);
      EXPECT_LE((exact - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, exact.cwiseAbs().maxCoeff()));
    }
  }
}
