#pragma once

#include <array>
#include <vector>

#include "kinkflow/instance.hpp"

namespace kinkflow {

// Log-coordinate profile W(k) = sum_{i<k} ln J_i - k ln(gamma) for k = 1..N,
// where J are the physical couplings of the chain and gamma the uniform
// transverse field in coupling units. Entry [k-1] holds W(k).
std::vector<double> griffiths_walk(const ChainInstance& inst, double gamma);

// Estimates of the two smallest single-particle energies from the extremal
// structure of the walk. The double-rise decomposition W1 <= W2 >= W3 <= W4
// maximizes (W2 - W1) + (W4 - W3); the largest single rise R1 gives
// eps0 = exp(-R1) and the remainder gives eps1 = exp(-(R2 - R1)), covering
// both field regimes with one rule.
struct GriffithsEstimate {
  double eps0 = 1.0;
  double eps1 = 1.0;
  std::array<double, 4> extrema{};   // W1, W2, W3, W4
  std::array<int, 4> positions{};    // their k values, 1-based
  bool degenerate = false;           // fewer than four distinct extrema
};

GriffithsEstimate griffiths_estimate(const ChainInstance& inst, double gamma);

// Field strength at which the two highest extrema balance (W2 = W4), the
// approximate location of the minimum gap. Found by bisection in ln(gamma).
double estimate_critical_gamma(const ChainInstance& inst);

}  // namespace kinkflow
