#include "kinkflow/observables.hpp"

#include <cmath>
#include <sstream>

#include "kinkflow/errors.hpp"

namespace kinkflow {

namespace {

constexpr double kClampWindow = 1e-9;
constexpr double kAsymmetryLimit = 1e-8;

}  // namespace

Eigen::MatrixXd pairing_matrix_a(int n_spins) {
  require(n_spins >= 1, "pairing matrices need at least one spin");
  const int dim = 2 * n_spins;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < n_spins; ++k) {
    a(2 * k, 2 * k + 1) = 1.0;
    a(2 * k + 1, 2 * k) = -1.0;
  }
  return a;
}

Eigen::MatrixXd pairing_matrix_b(int n_spins) {
  require(n_spins >= 1, "pairing matrices need at least one spin");
  const int dim = 2 * n_spins;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 1; k < n_spins; ++k) {
    b(2 * k - 1, 2 * k) = 1.0;
    b(2 * k, 2 * k - 1) = -1.0;
  }
  b(0, dim - 1) = 1.0;
  b(dim - 1, 0) = -1.0;
  return b;
}

ProbabilityResult ground_state_probability(const Eigen::MatrixXd& s) {
  const int dim = static_cast<int>(s.rows());
  require(dim >= 2 && dim % 2 == 0 && s.cols() == dim,
          "evolution operator must be square with even dimension");
  const int n = dim / 2;

  // S * A by column moves: column 2k+1 of A picks +S_col(2k), column 2k
  // picks -S_col(2k+1).
  Eigen::MatrixXd sa(dim, dim);
  for (int k = 0; k < n; ++k) {
    sa.col(2 * k) = -s.col(2 * k + 1);
    sa.col(2 * k + 1) = s.col(2 * k);
  }
  Eigen::MatrixXd x = sa * s.transpose();
  for (int k = 1; k < n; ++k) {
    x(2 * k - 1, 2 * k) += 1.0;
    x(2 * k, 2 * k - 1) -= 1.0;
  }
  x(0, dim - 1) += 1.0;
  x(dim - 1, 0) -= 1.0;
  x *= 0.5;

  ProbabilityResult result;
  result.asymmetry = (x + x.transpose()).cwiseAbs().maxCoeff();
  if (result.asymmetry > kAsymmetryLimit) {
    std::ostringstream msg;
    msg << "determinant argument lost antisymmetry: " << result.asymmetry;
    throw NumericError(msg.str());
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(x);
  double log_abs_det = 0.0;
  bool singular = false;
  for (int i = 0; i < dim; ++i) {
    const double u = std::abs(lu.matrixLU()(i, i));
    if (u == 0.0) {
      singular = true;
      break;
    }
    log_abs_det += std::log(u);
  }
  if (!std::isfinite(log_abs_det))
    throw NumericError("determinant evaluation produced non-finite value");

  double p0 = singular ? 0.0 : std::exp(0.5 * log_abs_det);
  if (p0 > 1.0 + kClampWindow) {
    std::ostringstream msg;
    msg << "probability " << p0 << " outside the roundoff window above 1";
    throw NumericError(msg.str());
  }
  if (p0 > 1.0) {
    p0 = 1.0;
    result.clamped = true;
  }
  result.p0 = p0;
  return result;
}

}  // namespace kinkflow
