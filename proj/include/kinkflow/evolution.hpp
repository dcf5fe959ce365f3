#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinkflow/banded.hpp"
#include "kinkflow/instance.hpp"

namespace kinkflow {

// cm2..cm8: Cayley-factored Magnus steppers of convergence order 2, 4, 6, 8
// (series truncation levels p = 1..4). rk_baseline5/8: classical explicit
// Runge-Kutta of orders 5 and 8 with plain additive updates, kept as the
// non-orthogonality-preserving comparison point.
enum class Method { cm2, cm4, cm6, cm8, rk_baseline5, rk_baseline8 };

bool is_cayley_magnus(Method m);
int magnus_truncation(Method m);  // p in 1..4 for the cm family
int convergence_order(Method m);
const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct ParallelPlan {
  enum class Kind { serial, column_split, interval_split };
  Kind kind = Kind::serial;
  int n = 1;  // workers or segments
};

struct IntegratorConfig {
  Method method = Method::cm8;
  // Step size in the units of AnnealSchedule::total_time. Internally the
  // stepper works in normalized time t/T with couplings premultiplied by T,
  // and dt shrinks so the interval divides into a whole number of steps.
  double dt = 1.0;
  ParallelPlan parallel{};
  // Cadence of the orthogonality checkpoint (full S^T S - I evaluation).
  long drift_check_interval = 64;
  // Cayley-Magnus runs abort when a checkpoint exceeds this.
  double drift_abort = 1e-12;
};

struct EvolutionOperator {
  Eigen::MatrixXd matrix;  // 2n x 2n, S(t2) S(t1)^{-1}
  double t = 0.0;          // right end of the integrated interval
  double orthogonality_drift = 0.0;  // max |S^T S - I| over checkpoints
  long steps = 0;
};

// Propagator of dS/dt = 2 W(t) S over [t1, t2] for the linear-schedule chain.
EvolutionOperator integrate(const ChainInstance& inst, const AnnealSchedule& sched,
                            const IntegratorConfig& cfg, double t1, double t2);
// Full anneal [0, T].
EvolutionOperator integrate(const ChainInstance& inst, const AnnealSchedule& sched,
                            const IntegratorConfig& cfg);

// One Cayley factor set: the Pade denominator roots of the method, real roots
// plus complex pairs folded to (re, |sigma|^2) so the product stays in real
// arithmetic.
struct CayleyFactor {
  bool pair = false;
  double re = 0.0;
  double absq = 0.0;  // unused for real roots
};
const std::vector<CayleyFactor>& cayley_factors(Method m);

// Applies the Cayley product approximating exp(omega) to dense columns
// (column-major, a.dim rows). Exact isometry for skew omega.
void cayley_factor_step(const BandedMatrix& omega, Method m, double* cols,
                        int ld, int ncols);

// Reusable stepping engine bound to one (instance, schedule, method, dt,
// interval). Exposes the per-step pieces so benchmarks and tests can drive
// single steps or single columns.
class MagnusStepper {
 public:
  MagnusStepper(const ChainInstance& inst, const AnnealSchedule& sched, Method m,
                double dt, double t1, double t2);
  ~MagnusStepper();
  MagnusStepper(const MagnusStepper&) = delete;
  MagnusStepper& operator=(const MagnusStepper&) = delete;

  int dim() const;
  long steps() const;
  double dt_physical() const;  // after shrinking to divide the interval
  Method method() const;

  // Midpoint-rule Magnus series for step k, with step-size powers folded in.
  const BandedMatrix& omega(long k);
  // Applies the factored exp(omega(k)) to dense columns in place.
  void apply_step(long k, double* cols, int ld, int ncols);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Convenience wrapper building omega for a single midpoint; dt in physical
// units like IntegratorConfig.
BandedMatrix magnus_omega(const ChainInstance& inst, const AnnealSchedule& sched,
                          Method m, double t_mid, double dt);

}  // namespace kinkflow
