#include "kinkflow/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "kinkflow/errors.hpp"
#include "rk_tableaus.hpp"

namespace kinkflow {

bool is_cayley_magnus(Method m) {
  return m == Method::cm2 || m == Method::cm4 || m == Method::cm6 || m == Method::cm8;
}

int magnus_truncation(Method m) {
  switch (m) {
    case Method::cm2: return 1;
    case Method::cm4: return 2;
    case Method::cm6: return 3;
    case Method::cm8: return 4;
    default: throw ValidationError("magnus truncation defined for cm methods only");
  }
}

int convergence_order(Method m) {
  switch (m) {
    case Method::cm2: return 2;
    case Method::cm4: return 4;
    case Method::cm6: return 6;
    case Method::cm8: return 8;
    case Method::rk_baseline5: return 5;
    case Method::rk_baseline8: return 8;
  }
  return 0;
}

const char* to_string(Method m) {
  switch (m) {
    case Method::cm2: return "cm2";
    case Method::cm4: return "cm4";
    case Method::cm6: return "cm6";
    case Method::cm8: return "cm8";
    case Method::rk_baseline5: return "rk_baseline5";
    case Method::rk_baseline8: return "rk_baseline8";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "cm2") return Method::cm2;
  if (s == "cm4") return Method::cm4;
  if (s == "cm6") return Method::cm6;
  if (s == "cm8") return Method::cm8;
  if (s == "rk_baseline5" || s == "rk5") return Method::rk_baseline5;
  if (s == "rk_baseline8" || s == "rk8") return Method::rk_baseline8;
  throw ValidationError("unknown integrator method: " + s);
}

const std::vector<CayleyFactor>& cayley_factors(Method m) {
  // Roots of the monic Pade(q, q) denominators of exp, q = magnus truncation:
  //   q=1: s - 2
  //   q=2: s^2 - 6 s + 12
  //   q=3: s^3 - 12 s^2 + 60 s - 120
  //   q=4: s^4 - 20 s^3 + 180 s^2 - 840 s + 1680
  // Complex pairs are stored as (Re s, |s|^2).
  static const std::vector<CayleyFactor> f1 = {{false, 2.0, 0.0}};
  static const std::vector<CayleyFactor> f2 = {{true, 3.0, 12.0}};
  static const std::vector<CayleyFactor> f3 = {
      {false, 4.644370709252171186, 0.0},
      {true, 3.677814645373914407, 25.837730773933461389}};
  static const std::vector<CayleyFactor> f4 = {
      {true, 5.792421205640744337, 36.560523561111724102},
      {true, 4.207578794359255663, 45.951201907484799195}};
  switch (magnus_truncation(m)) {
    case 1: return f1;
    case 2: return f2;
    case 3: return f3;
    default: return f4;
  }
}

namespace {

int clip_bw(int want, int dim) { return std::min(want, dim - 1); }

// Bandwidth of the truncated Magnus series: the deepest nested commutator has
// q - 1 factors of H (bandwidth 1) around C (bandwidth 2).
int omega_half_bw(int q, int dim) {
  const int bw[5] = {0, 1, 2, 4, 6};
  return clip_bw(bw[q], dim);
}

void copy_scaled(const BandedMatrix& src, double alpha, BandedMatrix& dst) {
  dst.set_zero();
  banded_axpy(alpha, src, dst);
}

struct FactorWorkspace {
  BandedMatrix w2, rnum, rden, pnum, pden;
  std::vector<double> buf;

  void init(int dim, int obw, bool has_real, bool has_pair) {
    if (has_real) {
      rnum = BandedMatrix(dim, obw);
      rden = BandedMatrix(dim, obw);
    }
    if (has_pair) {
      const int pbw = clip_bw(2 * obw, dim);
      w2 = BandedMatrix(dim, pbw);
      pnum = BandedMatrix(dim, pbw);
      pden = BandedMatrix(dim, pbw);
    }
  }
};

void apply_factors(const BandedMatrix& omega, const std::vector<CayleyFactor>& fs,
                   FactorWorkspace& ws, double* cols, int ld, int ncols) {
  const int dim = omega.dim;
  ws.buf.resize(static_cast<std::size_t>(dim) * ncols);
  bool have_square = false;
  for (const CayleyFactor& f : fs) {
    BandedMatrix* num;
    BandedMatrix* den;
    if (f.pair) {
      if (!have_square) {
        banded_multiply(omega, omega, ws.w2);
        have_square = true;
      }
      ws.pnum.data = ws.w2.data;
      banded_axpy(2.0 * f.re, omega, ws.pnum);
      banded_add_diagonal(ws.pnum, f.absq);
      ws.pden.data = ws.w2.data;
      banded_axpy(-2.0 * f.re, omega, ws.pden);
      banded_add_diagonal(ws.pden, f.absq);
      num = &ws.pnum;
      den = &ws.pden;
    } else {
      copy_scaled(omega, 1.0, ws.rnum);
      banded_add_diagonal(ws.rnum, f.re);
      copy_scaled(omega, -1.0, ws.rden);
      banded_add_diagonal(ws.rden, f.re);
      num = &ws.rnum;
      den = &ws.rden;
    }
    banded_times_dense(*num, cols, ld, ws.buf.data(), dim, ncols);
    const BandedLU lu(*den);
    lu.solve_in_place(ws.buf.data(), dim, ncols);
    for (int c = 0; c < ncols; ++c)
      std::copy_n(ws.buf.data() + static_cast<std::size_t>(c) * dim, dim,
                  cols + static_cast<std::size_t>(c) * ld);
  }
}

}  // namespace

void cayley_factor_step(const BandedMatrix& omega, Method m, double* cols,
                        int ld, int ncols) {
  require(is_cayley_magnus(m), "cayley factors exist for cm methods only");
  const auto& fs = cayley_factors(m);
  bool has_real = false, has_pair = false;
  for (const auto& f : fs) (f.pair ? has_pair : has_real) = true;
  FactorWorkspace ws;
  ws.init(omega.dim, omega.half_bw, has_real, has_pair);
  apply_factors(omega, fs, ws, cols, ld, ncols);
}

struct MagnusStepper::Impl {
  int dim = 0;
  int q = 0;
  Method method{};
  long nsteps = 0;
  double tau1 = 0.0, dtau = 0.0, total_time = 0.0;

  BandedMatrix a, b;            // constant generators, bandwidth 1
  BandedMatrix d, c, dc, ddc;   // precomputed series terms (per truncation)
  BandedMatrix h, w;            // per-step
  BandedMatrix hc, hhc, hdc, hhdc, dhhc, hhhc, hhhhc;
  FactorWorkspace factors;
  long cached_k = -1;

  Impl(const ChainInstance& inst, const AnnealSchedule& sched, Method m,
       double dt, double t1, double t2) {
    inst.validate();
    sched.validate();
    require(is_cayley_magnus(m), "magnus stepper requires a cm method");
    require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    const double T = sched.total_time;
    require(t1 >= 0.0 && t1 <= t2 && t2 <= T, "need 0 <= t1 <= t2 <= total_time");
    method = m;
    q = magnus_truncation(m);
    total_time = T;
    const int n = inst.total_spins();
    dim = 2 * n;
    tau1 = t1 / T;
    const double tau2 = t2 / T;
    nsteps = t1 == t2 ? 0 : static_cast<long>(std::ceil((tau2 - tau1) / (dt / T)));
    dtau = nsteps == 0 ? 0.0 : (tau2 - tau1) / nsteps;

    a = BandedMatrix(dim, 1);
    b = BandedMatrix(dim, 1);
    for (int i = 0; i < n; ++i) {
      a.at(2 * i, 2 * i + 1) = 2.0 * T;
      a.at(2 * i + 1, 2 * i) = -2.0 * T;
    }
    for (int k = 0; k + 1 < n; ++k) {
      const double v = 2.0 * T * inst.couplings[k];
      b.at(2 * k + 1, 2 * k + 2) = v;
      b.at(2 * k + 2, 2 * k + 1) = -v;
    }

    const int obw = omega_half_bw(q, dim);
    h = BandedMatrix(dim, 1);
    w = BandedMatrix(dim, obw);
    if (q >= 2) {
      d = BandedMatrix(dim, 1);
      banded_axpy(dtau * dtau, b, d);
      banded_axpy(-dtau * dtau, a, d);
      c = BandedMatrix(dim, clip_bw(2, dim));
      banded_commutator(a, b, c);
      banded_scale(c, dtau * dtau * dtau);
    }
    if (q >= 3) {
      dc = BandedMatrix(dim, clip_bw(3, dim));
      banded_commutator(d, c, dc);
      hc = BandedMatrix(dim, clip_bw(3, dim));
      hhc = BandedMatrix(dim, clip_bw(4, dim));
    }
    if (q >= 4) {
      ddc = BandedMatrix(dim, clip_bw(4, dim));
      banded_commutator(d, dc, ddc);
      hdc = BandedMatrix(dim, clip_bw(4, dim));
      hhdc = BandedMatrix(dim, clip_bw(5, dim));
      dhhc = BandedMatrix(dim, clip_bw(5, dim));
      hhhc = BandedMatrix(dim, clip_bw(5, dim));
      hhhhc = BandedMatrix(dim, clip_bw(6, dim));
    }
    const auto& fs = cayley_factors(m);
    bool has_real = false, has_pair = false;
    for (const auto& f : fs) (f.pair ? has_pair : has_real) = true;
    factors.init(dim, obw, has_real, has_pair);
  }

  const BandedMatrix& omega(long k) {
    require(k >= 0 && k < nsteps, "step index out of range");
    if (k == cached_k) return w;
    const double tm = tau1 + (k + 0.5) * dtau;
    h.set_zero();
    banded_axpy((1.0 - tm) * dtau, a, h);
    banded_axpy(tm * dtau, b, h);
    w.set_zero();
    banded_axpy(1.0, h, w);
    if (q >= 2) banded_axpy(-1.0 / 12.0, c, w);
    if (q >= 3) {
      banded_commutator(h, c, hc);
      banded_commutator(h, hc, hhc);
      banded_axpy(-1.0 / 240.0, dc, w);
      banded_axpy(1.0 / 720.0, hhc, w);
    }
    if (q >= 4) {
      banded_commutator(h, dc, hdc);
      banded_commutator(h, hdc, hhdc);
      banded_commutator(d, hhc, dhhc);
      banded_commutator(h, hhc, hhhc);
      banded_commutator(h, hhhc, hhhhc);
      banded_axpy(-1.0 / 6720.0, ddc, w);
      banded_axpy(-1.0 / 30240.0, hhdc, w);
      banded_axpy(1.0 / 7560.0, dhhc, w);
      banded_axpy(-1.0 / 30240.0, hhhhc, w);
    }
    cached_k = k;
    return w;
  }
};

MagnusStepper::MagnusStepper(const ChainInstance& inst, const AnnealSchedule& sched,
                             Method m, double dt, double t1, double t2)
    : impl_(std::make_unique<Impl>(inst, sched, m, dt, t1, t2)) {}

MagnusStepper::~MagnusStepper() = default;

int MagnusStepper::dim() const { return impl_->dim; }
long MagnusStepper::steps() const { return impl_->nsteps; }
double MagnusStepper::dt_physical() const { return impl_->dtau * impl_->total_time; }
Method MagnusStepper::method() const { return impl_->method; }

const BandedMatrix& MagnusStepper::omega(long k) { return impl_->omega(k); }

void MagnusStepper::apply_step(long k, double* cols, int ld, int ncols) {
  const BandedMatrix& om = impl_->omega(k);
  apply_factors(om, cayley_factors(impl_->method), impl_->factors, cols, ld, ncols);
}

BandedMatrix magnus_omega(const ChainInstance& inst, const AnnealSchedule& sched,
                          Method m, double t_mid, double dt) {
  const double T = sched.total_time;
  require(t_mid - dt / 2.0 >= -1e-12 && t_mid + dt / 2.0 <= T + 1e-12,
          "midpoint interval must lie inside [0, total_time]");
  const double t1 = std::max(0.0, t_mid - dt / 2.0);
  const double t2 = std::min(T, t_mid + dt / 2.0);
  MagnusStepper stepper(inst, sched, m, dt, t1, t2);
  require(stepper.steps() == 1, "midpoint wrapper expects a single step");
  return stepper.omega(0);
}

namespace {

double orthogonality_defect(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd g = s.transpose() * s;
  g.diagonal().array() -= 1.0;
  return g.cwiseAbs().maxCoeff();
}

struct RkTableau {
  int stages;
  const double* c;
  const double* b;
  const double* a;  // stages x stages row-major
};

RkTableau rk_tableau(Method m) {
  using namespace detail;
  if (m == Method::rk_baseline5)
    return {kRk5Stages, kRk5C, kRk5B, &kRk5A[0][0]};
  return {kRk8Stages, kRk8C, kRk8B, &kRk8A[0][0]};
}

// Shared per-run state for the Runge-Kutta baselines: the same normalized
// generators as the Magnus path, plain additive stage updates.
struct RkEngine {
  int dim = 0;
  long nsteps = 0;
  double tau1 = 0.0, dtau = 0.0;
  RkTableau tab{};
  BandedMatrix a, b, hstage;
  std::vector<Eigen::MatrixXd> k;
  Eigen::MatrixXd y;

  RkEngine(const ChainInstance& inst, const AnnealSchedule& sched, Method m,
           double dt, double t1, double t2, int ncols) {
    inst.validate();
    sched.validate();
    require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    const double T = sched.total_time;
    require(t1 >= 0.0 && t1 <= t2 && t2 <= T, "need 0 <= t1 <= t2 <= total_time");
    const int n = inst.total_spins();
    dim = 2 * n;
    tau1 = t1 / T;
    const double tau2 = t2 / T;
    nsteps = t1 == t2 ? 0 : static_cast<long>(std::ceil((tau2 - tau1) / (dt / T)));
    dtau = nsteps == 0 ? 0.0 : (tau2 - tau1) / nsteps;
    tab = rk_tableau(m);
    a = BandedMatrix(dim, 1);
    b = BandedMatrix(dim, 1);
    for (int i = 0; i < n; ++i) {
      a.at(2 * i, 2 * i + 1) = 2.0 * T;
      a.at(2 * i + 1, 2 * i) = -2.0 * T;
    }
    for (int kk = 0; kk + 1 < n; ++kk) {
      const double v = 2.0 * T * inst.couplings[kk];
      b.at(2 * kk + 1, 2 * kk + 2) = v;
      b.at(2 * kk + 2, 2 * kk + 1) = -v;
    }
    hstage = BandedMatrix(dim, 1);
    k.assign(tab.stages, Eigen::MatrixXd(dim, ncols));
    y.resize(dim, ncols);
  }

  void build_h(double tau) {
    hstage.set_zero();
    banded_axpy(1.0 - tau, a, hstage);
    banded_axpy(tau, b, hstage);
  }

  // One fixed step on a column block held in s (dim x ncols, column-major).
  void step(long idx, Eigen::Ref<Eigen::MatrixXd> s) {
    const double tau = tau1 + idx * dtau;
    const int ncols = static_cast<int>(s.cols());
    require(ncols <= k[0].cols(), "column block wider than stage workspace");
    auto yb = y.leftCols(ncols);
    for (int i = 0; i < tab.stages; ++i) {
      yb = s;
      for (int j = 0; j < i; ++j) {
        const double aij = tab.a[static_cast<std::size_t>(i) * tab.stages + j];
        if (aij != 0.0) yb.noalias() += (dtau * aij) * k[j].leftCols(ncols);
      }
      build_h(tau + tab.c[i] * dtau);
      banded_times_dense(hstage, yb.data(), dim, k[i].data(), dim, ncols);
    }
    for (int i = 0; i < tab.stages; ++i) {
      const double bi = tab.b[i];
      if (bi != 0.0) s.noalias() += (dtau * bi) * k[i].leftCols(ncols);
    }
  }
};

struct SerialOutcome {
  double drift = 0.0;
  long bad_step = -1;  // first checkpoint step exceeding the abort threshold
  double last_good_t = 0.0;
};

// Runs steps [k_begin, k_end) of a global grid on a column block. Checkpoints
// measure the local propagator, which starts from identity columns; callers
// with partial column blocks skip checkpoints and verify at the end.
template <typename StepFn>
SerialOutcome run_steps(StepFn&& step, long k_begin, long k_end,
                        Eigen::Ref<Eigen::MatrixXd> s, bool checkpoints,
                        bool allow_abort, double abort_tol, long interval,
                        double t_begin, double dt_phys) {
  SerialOutcome out;
  out.last_good_t = t_begin;
  long since_check = 0;
  for (long k = k_begin; k < k_end; ++k) {
    step(k, s);
    ++since_check;
    const bool last = k + 1 == k_end;
    if (checkpoints && (since_check >= interval || last)) {
      since_check = 0;
      if (!s.allFinite())
        throw NumericError("integration produced non-finite values (unstable step size)");
      const double defect = orthogonality_defect(s);
      out.drift = std::max(out.drift, defect);
      if (allow_abort && defect > abort_tol) {
        out.bad_step = k + 1;
        return out;
      }
      out.last_good_t = t_begin + (k + 1 - k_begin) * dt_phys;
    }
  }
  return out;
}

[[noreturn]] void throw_drift(double t_good, double defect, double tol) {
  std::ostringstream msg;
  msg << "orthogonality drift " << defect << " exceeded " << tol
      << "; last good time t = " << t_good;
  throw NumericError(msg.str());
}

struct GridInfo {
  long nsteps;
  double dt_phys;
};

GridInfo grid_info(const ChainInstance& inst, const AnnealSchedule& sched,
                   const IntegratorConfig& cfg, double t1, double t2) {
  if (is_cayley_magnus(cfg.method)) {
    MagnusStepper probe(inst, sched, cfg.method, cfg.dt, t1, t2);
    return {probe.steps(), probe.dt_physical()};
  }
  RkEngine probe(inst, sched, cfg.method, cfg.dt, t1, t2, 1);
  return {probe.nsteps, probe.dtau * sched.total_time};
}

}  // namespace

EvolutionOperator integrate(const ChainInstance& inst, const AnnealSchedule& sched,
                            const IntegratorConfig& cfg, double t1, double t2) {
  inst.validate();
  sched.validate();
  require(cfg.parallel.n >= 1 && cfg.parallel.n <= 4096,
          "parallel degree must lie in [1, 4096]");
  require(cfg.drift_check_interval >= 1, "drift check interval must be >= 1");
  const int dim = 2 * inst.total_spins();
  const bool cm = is_cayley_magnus(cfg.method);

  EvolutionOperator result;
  result.matrix = Eigen::MatrixXd::Identity(dim, dim);
  result.t = t2;
  if (t1 == t2) return result;

  const GridInfo grid = grid_info(inst, sched, cfg, t1, t2);
  result.steps = grid.nsteps;

  const auto make_step = [&](int ncols) {
    // Returns a closure owning its engine; each caller gets private state.
    if (cm) {
      auto stepper = std::make_shared<MagnusStepper>(inst, sched, cfg.method,
                                                     cfg.dt, t1, t2);
      return std::function<void(long, Eigen::Ref<Eigen::MatrixXd>)>(
          [stepper](long k, Eigen::Ref<Eigen::MatrixXd> s) {
            stepper->apply_step(k, s.data(), static_cast<int>(s.outerStride()),
                                static_cast<int>(s.cols()));
          });
    }
    auto engine = std::make_shared<RkEngine>(inst, sched, cfg.method, cfg.dt, t1,
                                             t2, ncols);
    return std::function<void(long, Eigen::Ref<Eigen::MatrixXd>)>(
        [engine](long k, Eigen::Ref<Eigen::MatrixXd> s) { engine->step(k, s); });
  };

  const ParallelPlan::Kind kind =
      cfg.parallel.n == 1 ? ParallelPlan::Kind::serial : cfg.parallel.kind;

  if (kind == ParallelPlan::Kind::serial) {
    auto step = make_step(dim);
    const SerialOutcome out =
        run_steps(step, 0, grid.nsteps, result.matrix, true, cm, cfg.drift_abort,
                  cfg.drift_check_interval, t1, grid.dt_phys);
    if (out.bad_step >= 0)
      throw_drift(out.last_good_t, out.drift, cfg.drift_abort);
    result.orthogonality_drift = out.drift;
    return result;
  }

  if (kind == ParallelPlan::Kind::column_split) {
    const int workers = std::min(cfg.parallel.n, dim);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int wi = 0; wi < workers; ++wi) {
      const int c0 = static_cast<int>(static_cast<long>(wi) * dim / workers);
      const int c1 = static_cast<int>(static_cast<long>(wi + 1) * dim / workers);
      pool.emplace_back([&, wi, c0, c1] {
        try {
          auto step = make_step(c1 - c0);
          auto block = result.matrix.middleCols(c0, c1 - c0);
          run_steps(step, 0, grid.nsteps, block, false, false, 0.0, 1, t1,
                    grid.dt_phys);
        } catch (...) {
          errors[wi] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    if (!result.matrix.allFinite())
      throw NumericError("integration produced non-finite values (unstable step size)");
    const double defect = orthogonality_defect(result.matrix);
    result.orthogonality_drift = defect;
    if (cm && defect > cfg.drift_abort) throw_drift(t1, defect, cfg.drift_abort);
    return result;
  }

  // interval_split: segments share the global step grid and integrate from
  // identity; the ordered product S_n ... S_1 reassembles the full interval.
  const int nseg = std::min<long>(cfg.parallel.n, grid.nsteps);
  std::vector<Eigen::MatrixXd> segs(nseg);
  std::vector<SerialOutcome> outcomes(nseg);
  std::vector<std::exception_ptr> errors(nseg);
  std::vector<std::thread> pool;
  for (int si = 0; si < nseg; ++si) {
    pool.emplace_back([&, si] {
      try {
        const long a = si * grid.nsteps / nseg;
        const long b = (si + 1) * grid.nsteps / nseg;
        segs[si] = Eigen::MatrixXd::Identity(dim, dim);
        auto step = make_step(dim);
        outcomes[si] =
            run_steps(step, a, b, segs[si], true, cm, cfg.drift_abort,
                      cfg.drift_check_interval, t1 + a * grid.dt_phys, grid.dt_phys);
      } catch (...) {
        errors[si] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  double drift = 0.0;
  for (const auto& out : outcomes) {
    if (out.bad_step >= 0) throw_drift(out.last_good_t, out.drift, cfg.drift_abort);
    drift = std::max(drift, out.drift);
  }
  for (int si = 0; si < nseg; ++si) {
    if (si == 0)
      result.matrix = segs[0];
    else
      result.matrix = (segs[si] * result.matrix).eval();
  }
  result.orthogonality_drift = std::max(drift, orthogonality_defect(result.matrix));
  return result;
}

EvolutionOperator integrate(const ChainInstance& inst, const AnnealSchedule& sched,
                            const IntegratorConfig& cfg) {
  return integrate(inst, sched, cfg, 0.0, sched.total_time);
}

}  // namespace kinkflow
