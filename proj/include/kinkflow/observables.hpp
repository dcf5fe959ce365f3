#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kinkflow/instance.hpp"

namespace kinkflow {

// Antisymmetric pairing matrices entering the success-probability formula:
// A couples the Majorana partners of the driver quasiparticles on sites
// (2k, 2k+1); B couples neighbours (2k-1, 2k) plus the antiperiodic corner
// (0, 2n-1) for the problem quasiparticles.
Eigen::MatrixXd pairing_matrix_a(int n_spins);
Eigen::MatrixXd pairing_matrix_b(int n_spins);

struct ProbabilityResult {
  double p0 = 0.0;
  // max |X + X^T| of the determinant argument X = (S A S^T + B) / 2.
  double asymmetry = 0.0;
  // Raw value exceeded 1 by at most the roundoff window and was pulled back.
  bool clamped = false;
};

// Ground-state probability p0 = sqrt(|det (S A S^T + B) / 2|) from the final
// evolution operator S. The determinant is evaluated in log space through an
// LU factorization so exponentially small probabilities survive underflow.
// Raw values outside [0, 1 + 1e-9] (or an argument far from antisymmetric)
// signal integrator failure and raise a numeric error.
ProbabilityResult ground_state_probability(const Eigen::MatrixXd& s);

}  // namespace kinkflow
