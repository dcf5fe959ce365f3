#pragma once

#include <vector>

#include "kinkflow/instance.hpp"

namespace kinkflow {

// Brute-force reference for small chains, independent of the free-fermion
// machinery: dense 2^n Hamiltonians and direct state-vector propagation.
// Capped at 12 spins.
inline constexpr int kExactOracleMaxSpins = 12;

struct ExactOracleResult {
  std::vector<double> s_values;
  std::vector<std::vector<double>> spectra;  // all 2^n levels per s, ascending
  double p0 = 0.0;
};

// Full spectrum of H(s) = -(1-s) sum X_i - s sum J_k Z_k Z_{k+1}.
std::vector<double> exact_spectrum(const ChainInstance& inst, double s);

// Probability of ending in the even-parity classical ground state after a
// full anneal, from dense state-vector evolution started in the all-plus
// state. dt <= 0 picks a conservative default.
double exact_ground_state_probability(const ChainInstance& inst,
                                      const AnnealSchedule& sched, double dt = 0.0);

// Spectra at the requested s values plus the end-of-anneal probability.
ExactOracleResult exact_oracle(const ChainInstance& inst, const AnnealSchedule& sched,
                               const std::vector<double>& s_samples, double dt = 0.0);

}  // namespace kinkflow
