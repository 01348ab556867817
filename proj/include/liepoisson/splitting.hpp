#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "liepoisson/state.hpp"

namespace liepoisson {

/// Exact flow exp(t X_{H_i}) of one term of a split Hamiltonian.
/// advance(x, 0) must return x unchanged and negative t must be supported.
struct ExactFlow {
  Eigen::Index dimension = 0;
  std::function<StateVector(const StateVector&, double)> advance;
};

/// Ordered exactly-integrable flows whose vector fields sum to X_H.
class SplitScheme {
 public:
  explicit SplitScheme(std::vector<ExactFlow> flows, int order_target = 1)
      : flows_(std::move(flows)), order_target_(order_target) {
    if (flows_.empty()) throw std::invalid_argument("SplitScheme: no flows");
    for (const auto& f : flows_) {
      if (f.dimension != flows_.front().dimension || !f.advance) {
        throw std::invalid_argument("SplitScheme: flows must share one dimension");
      }
    }
    if (order_target_ != 1 && (order_target_ < 2 || order_target_ % 2 != 0)) {
      throw std::invalid_argument("SplitScheme: order target must be 1 or even");
    }
  }

  Eigen::Index dimension() const noexcept { return flows_.front().dimension; }
  const std::vector<ExactFlow>& flows() const noexcept { return flows_; }
  int order_target() const noexcept { return order_target_; }

 private:
  std::vector<ExactFlow> flows_;
  int order_target_;
};

namespace detail {

inline StateVector advance_checked(const ExactFlow& flow, const StateVector& x,
                                   double t) {
  StateVector y = flow.advance(x, t);
  require_dimension(y, flow.dimension, "ExactFlow");
  return y;
}

}  // namespace detail

/// Applies every flow for time h in list order: flow_k(h) o ... o flow_1(h).
inline StateVector lie_trotter_step(const SplitScheme& scheme,
                                    const StateVector& x, double h) {
  detail::require_dimension(x, scheme.dimension(), "lie_trotter_step");
  StateVector y = x;
  for (const auto& flow : scheme.flows()) y = detail::advance_checked(flow, y, h);
  return y;
}

/// Palindromic composition: flows 1..k-1 for h/2, flow k for h, then
/// flows k-1..1 for h/2. Second order and self-adjoint.
inline StateVector strang_step(const SplitScheme& scheme, const StateVector& x,
                               double h) {
  detail::require_dimension(x, scheme.dimension(), "strang_step");
  const auto& flows = scheme.flows();
  const std::size_t k = flows.size();
  StateVector y = x;
  for (std::size_t i = 0; i + 1 < k; ++i)
    y = detail::advance_checked(flows[i], y, 0.5 * h);
  y = detail::advance_checked(flows[k - 1], y, h);
  for (std::size_t i = k - 1; i-- > 0;)
    y = detail::advance_checked(flows[i], y, 0.5 * h);
  return y;
}

/// Triple-jump weights lifting an order-2n method to order 2n+2.
struct CompositionCoefficients {
  int n;
  double x0;  // middle substep weight (negative)
  double x1;  // outer substep weight
};

inline CompositionCoefficients composition_coefficients(int n) {
  if (n < 1) throw std::invalid_argument("composition_coefficients: n must be >= 1");
  const double root = std::pow(2.0, 1.0 / (2.0 * n + 1.0));
  return {n, root / (root - 2.0), 1.0 / (2.0 - root)};
}

struct CompositionStepCount {
  std::uint64_t steps;                 // k = 1 + 3^(n-1)
  std::uint64_t second_order_calls;    // 3^(n-1)
};

/// Step count for an order-2n composition built from the second-order method.
inline CompositionStepCount composition_step_count(int n) {
  if (n < 1) throw std::invalid_argument("composition_step_count: n must be >= 1");
  if (n > 40) throw std::overflow_error("composition_step_count: n too large");
  std::uint64_t p = 1;
  for (int i = 1; i < n; ++i) p *= 3;
  return {1 + p, p};
}

/// Orders above this still work but the number of Strang substeps (3^(n-1))
/// grows quickly; front ends should warn.
inline constexpr int kRecommendedMaxOrder = 8;

inline bool exceeds_recommended_order(int order) noexcept {
  return order > kRecommendedMaxOrder;
}

namespace detail {

inline StateVector composition_level(const SplitScheme& scheme,
                                     const StateVector& x, double h, int order) {
  if (order == 2) return strang_step(scheme, x, h);
  const auto c = composition_coefficients((order - 2) / 2);
  StateVector y = composition_level(scheme, x, c.x1 * h, order - 2);
  y = composition_level(scheme, y, c.x0 * h, order - 2);
  return composition_level(scheme, y, c.x1 * h, order - 2);
}

}  // namespace detail

/// Recursive triple-jump composition of strang_step reaching `order`
/// (4, 6, 8, ...). Substep times x1 h, x0 h, x1 h with x0 < 0.
inline StateVector yoshida_step(const SplitScheme& scheme, const StateVector& x,
                                double h, int order = 4) {
  if (order < 4 || order % 2 != 0) {
    throw std::invalid_argument("yoshida_step: order must be even and >= 4");
  }
  detail::require_dimension(x, scheme.dimension(), "yoshida_step");
  return detail::composition_level(scheme, x, h, order);
}

/// Dispatches on order: 1 Lie-Trotter, 2 Strang, >= 4 triple jump.
inline StateVector composition_step(const SplitScheme& scheme,
                                    const StateVector& x, double h, int order) {
  if (order == 1) return lie_trotter_step(scheme, x, h);
  if (order == 2) return strang_step(scheme, x, h);
  return yoshida_step(scheme, x, h, order);
}

}  // namespace liepoisson
