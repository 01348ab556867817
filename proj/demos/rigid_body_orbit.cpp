// Compares Lie-Trotter, Strang and fourth-order composition on the symmetric
// rigid body: global error at T = 10 and the Casimir/energy drift.

#include <cstdio>

#include "liepoisson/liepoisson.hpp"

using namespace liepoisson;

int main() {
  const RigidBodyParams body(2.0, 1.0);
  const SplitScheme scheme = make_rigid_body_scheme(body);
  const RigidBodyState m0(1.0, 1.0, 1.0);
  const double h = 0.05;
  const int steps = 200;
  const RigidBodyState reference = exact_solution(body, m0, h * steps);

  std::printf("%-10s %14s %14s %14s\n", "method", "error", "dC", "dH");
  for (int order : {1, 2, 4}) {
    StateVector m = m0;
    for (int n = 0; n < steps; ++n) m = composition_step(scheme, m, h, order);
    const RigidBodyState end = m.head<3>();
    std::printf("%-10s %14.6e %14.6e %14.6e\n",
                order == 1 ? "trotter" : order == 2 ? "strang" : "yoshida4",
                (end - reference).cwiseAbs().maxCoeff(), casimir(end) - casimir(m0),
                hamiltonian(body, end) - hamiltonian(body, m0));
  }
}
