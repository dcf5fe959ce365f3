// Acceptance gate: ten end-to-end checks with pinned tolerances, one PASS or
// FAIL line each. Exit status is the number of failed checks. Set
// KINKFLOW_ACCEPT_ONLY=3,7 to run a subset while iterating.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kinkflow/bench.hpp"
#include "kinkflow/evolution.hpp"
#include "kinkflow/exact.hpp"
#include "kinkflow/instance.hpp"
#include "kinkflow/observables.hpp"
#include "kinkflow/spectrum.hpp"
#include "kinkflow/stats.hpp"

using namespace kinkflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

ChainInstance uniform_chain(int n, double j) {
  ChainInstance c;
  c.n_logical = n;
  c.seed = 0;
  c.logical_couplings.assign(static_cast<size_t>(n - 1), j);
  c.couplings = c.logical_couplings;
  return c;
}

// 1. Free-fermion many-body levels against dense diagonalization.
Outcome check_spectrum_oracle() {
  const double kTol = 1e-10;
  const double s_values[5] = {0.2, 0.35, 0.5, 0.65, 0.8};
  double worst = 0.0;
  for (int n = 2; n <= 10; ++n) {
    for (int i = 0; i < 20; ++i) {
      auto inst = sample_logical(n, DisorderSpec::strong(study_instance_seed(101, n, i)));
      double s = s_values[i % 5];
      auto sp = spectrum_at(inst, s);
      auto mb = many_body_spectrum(sp.energies);
      auto ex = exact_spectrum(inst, s);
      if (mb.size() != ex.size()) return {false, "level count mismatch"};
      for (size_t k = 0; k < ex.size(); ++k)
        worst = std::max(worst, std::abs(mb[k] - ex[k]));
    }
  }
  return {worst <= kTol,
          "max level error " + fmt(worst) + " over n=2..10, 20 draws each (tol 1e-10)"};
}

// 2. Determinant success probability against state-vector propagation.
Outcome check_p0_oracle() {
  const double kTol = 1e-6;
  const double horizons[4] = {4.0, 16.0, 64.0, 256.0};
  double worst = 0.0;
  for (int n : {4, 6, 8}) {
    auto inst = sample_logical(n, DisorderSpec::strong(study_instance_seed(202, n, 0)));
    for (double t_final : horizons) {
      AnnealSchedule sched{t_final};
      IntegratorConfig cfg;
      cfg.dt = 0.25;
      auto s = integrate(inst, sched, cfg);
      double det_p0 = ground_state_probability(s.matrix).p0;
      double sv_p0 = exact_ground_state_probability(inst, sched);
      worst = std::max(worst, std::abs(det_p0 - sv_p0));
    }
  }
  return {worst <= kTol,
          "max |p0_det - p0_sv| " + fmt(worst) + " over n in {4,6,8}, T in {4..256} (tol 1e-6)"};
}

// 3. Closed form p0(S = I) = 2^(1-N).
Outcome check_identity_probability() {
  const double kTol = 1e-9;
  double worst = 0.0;
  for (int n = 2; n <= 10; ++n) {
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2 * n, 2 * n);
    double p0 = ground_state_probability(id).p0;
    double expect = std::ldexp(1.0, 1 - n);
    worst = std::max(worst, std::abs(p0 - expect) / expect);
  }
  return {worst <= kTol, "max rel error " + fmt(worst) + " for N=2..10 (tol 1e-9)"};
}

// 4. Clean-chain critical point and gap scaling.
Outcome check_uniform_gap() {
  const int sizes[4] = {64, 128, 256, 512};
  double s_c512 = 0.0;
  double ngap[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i) {
    auto mg = minimum_gap(uniform_chain(sizes[i], 1.0));
    ngap[i] = sizes[i] * mg.gap;
    if (sizes[i] == 512) s_c512 = mg.s_c;
  }
  double loc_err = std::abs(s_c512 - 0.5);
  double var = std::abs(ngap[2] - ngap[3]) / ngap[3];
  bool pass = loc_err <= 0.01 && var < 0.10;
  return {pass, "|s_c(512) - 1/2| = " + fmt(loc_err) + " (tol 0.01), N*gap varies " +
                    fmt(100.0 * var) + "% across 256->512 (tol 10%)"};
}

// 5. Strong-disorder critical point from 200 draws at N = 256.
Outcome check_disorder_critical_point() {
  const double kExpect = 0.731, kTol = 0.02;
  std::vector<double> s_cs;
  for (int i = 0; i < 200; ++i) {
    auto inst = sample_logical(256, DisorderSpec::strong(study_instance_seed(505, 256, i)));
    s_cs.push_back(minimum_gap(inst).s_c);
  }
  double med = median_of(s_cs);
  return {std::abs(med - kExpect) <= kTol,
          "median s_c = " + fmt(med) + " (expect 0.731 +- 0.02)"};
}

// 6. Gap scaling laws: stretched-exponential for bare strong disorder,
// power law for the balanced 3-block embedding.
Outcome check_gap_scaling() {
  EnsembleStudy study;
  study.sizes = {64, 128, 256, 512};
  study.instances_per_size = 100;
  study.bootstrap_samples = 50;
  study.seed = 606;
  StudyConfig bare;
  auto result = median_gap_study(study, bare);
  std::vector<double> sqrt_n, ln_n, ln_gap;
  for (const auto& row : result.rows) {
    sqrt_n.push_back(std::sqrt(static_cast<double>(row.n)));
    ln_n.push_back(std::log(static_cast<double>(row.n)));
    ln_gap.push_back(std::log(row.median_n_gap / row.n));
  }
  auto fit_sqrt = linear_fit(sqrt_n, ln_gap);
  auto fit_log = linear_fit(ln_n, ln_gap);

  EnsembleStudy bal_study;
  bal_study.sizes = {16, 32, 64, 128};
  bal_study.instances_per_size = 50;
  bal_study.bootstrap_samples = 50;
  bal_study.seed = 607;
  StudyConfig balanced;
  balanced.disorder = DisorderKind::uniform_scaled;
  balanced.embedding = EmbeddingKind::balanced;
  balanced.block_size = 3;
  balanced.edge = EdgeExponent::stabilized;
  auto bal = median_gap_study(bal_study, balanced);
  std::vector<double> bln_n, bln_gap;
  for (const auto& row : bal.rows) {
    bln_n.push_back(std::log(static_cast<double>(row.n)));
    bln_gap.push_back(std::log(row.median_n_gap / row.n));
  }
  auto fit_pow = linear_fit(bln_n, bln_gap);

  bool pass = fit_sqrt.r2 > fit_log.r2 && fit_pow.r2 > 0.98;
  return {pass, "bare R2(sqrt N) = " + fmt(fit_sqrt.r2) + " vs R2(ln N) = " + fmt(fit_log.r2) +
                    "; balanced log-log R2 = " + fmt(fit_pow.r2) + " (need > 0.98)"};
}

// 7. Balanced embedding beats canonical on both gap and time to solution,
// with 90% bootstrap intervals separated.
Outcome check_embedding_ordering() {
  const int kN = 64;
  const int kInstances = 50;

  auto run_gap = [&](EmbeddingKind kind) {
    EnsembleStudy study;
    study.sizes = {kN};
    study.instances_per_size = kInstances;
    study.bootstrap_samples = 200;
    study.ci_level = 0.90;
    study.seed = 707;
    StudyConfig cfg;
    cfg.disorder = DisorderKind::uniform_scaled;
    cfg.embedding = kind;
    cfg.block_size = 3;
    cfg.edge = EdgeExponent::stabilized;
    return median_gap_study(study, cfg).rows.at(0);
  };
  auto gap_bal = run_gap(EmbeddingKind::balanced);
  auto gap_can = run_gap(EmbeddingKind::canonical);

  auto run_tts = [&](EmbeddingKind kind) {
    EnsembleStudy study;
    study.sizes = {kN};
    study.instances_per_size = kInstances;
    study.t_grid = {512.0, 1024.0, 2048.0, 4096.0, 8192.0, 16384.0};
    study.bootstrap_samples = 200;
    study.ci_level = 0.90;
    study.seed = 707;
    study.dt = 2.0;
    StudyConfig cfg;
    cfg.disorder = DisorderKind::uniform_scaled;
    cfg.embedding = kind;
    cfg.block_size = 3;
    cfg.edge = EdgeExponent::stabilized;
    return median_tts_study(study, cfg).rows.at(0);
  };
  auto tts_bal = run_tts(EmbeddingKind::balanced);
  auto tts_can = run_tts(EmbeddingKind::canonical);

  bool gap_order = gap_bal.median_n_gap > gap_can.median_n_gap &&
                   gap_bal.ci.lo > gap_can.ci.hi;
  bool tau_order = tts_bal.median_tau_norm < tts_can.median_tau_norm &&
                   tts_bal.ci.hi < tts_can.ci.lo;
  return {gap_order && tau_order,
          "N=64 M=3: gap med bal/can = " + fmt(gap_bal.median_n_gap) + "/" +
              fmt(gap_can.median_n_gap) + " CI [" + fmt(gap_bal.ci.lo) + "," +
              fmt(gap_bal.ci.hi) + "] vs [" + fmt(gap_can.ci.lo) + "," + fmt(gap_can.ci.hi) +
              "]; tau/N^2 med bal/can = " + fmt(tts_bal.median_tau_norm) + "/" +
              fmt(tts_can.median_tau_norm) + " CI [" + fmt(tts_bal.ci.lo) + "," +
              fmt(tts_bal.ci.hi) + "] vs [" + fmt(tts_can.ci.lo) + "," + fmt(tts_can.ci.hi) + "]"};
}

// 8. Integrator benchmark: convergence orders, drift bounds, baseline decay.
Outcome check_integrator_benchmark() {
  IntegratorBenchConfig cfg;
  cfg.n = 64;
  cfg.t_final = 4096.0;
  cfg.instances = 10;
  cfg.dt_grid = {8.0, 4.0, 2.0, 1.0, 0.7, 0.5, 0.35};
  cfg.reference_dt = 0.125;
  cfg.seed = 808;
  auto result = integrator_benchmark(cfg);

  auto row_of = [](const IntegratorBenchResult& res, Method m,
                   double dt) -> const IntegratorBenchRow* {
    for (const auto& row : res.rows)
      if (row.method == m && std::abs(row.dt - dt) < 1e-9) return &row;
    return nullptr;
  };

  std::ostringstream note;
  bool pass = true;
  note << "grid 8..0.35 ref 0.125; ";

  // cm8 carries the smallest median error everywhere below the Magnus
  // stability cliff at dt~1.4.
  for (double dt : {1.0, 0.7, 0.5, 0.35}) {
    double cm8_err = row_of(result, Method::cm8, dt)->median_rel_error;
    for (Method m : cfg.methods) {
      if (m == Method::cm8) continue;
      if (row_of(result, m, dt)->median_rel_error <= cm8_err) {
        pass = false;
        note << "cm8 not lowest at dt=" << dt << " vs " << to_string(m) << "; ";
      }
    }
  }

  auto fit_slope = [&](const IntegratorBenchResult& res, Method m,
                       std::initializer_list<double> window) {
    std::vector<double> lx, ly;
    for (double dt : window) {
      const auto* row = row_of(res, m, dt);
      lx.push_back(std::log(row->dt));
      ly.push_back(std::log(row->median_rel_error));
    }
    return linear_fit(lx, ly).slope;
  };

  // cm4's signed p0 error keeps changing sign on this ensemble until well
  // below dt ~ 0.2, so its order is fitted on a finer sweep of its own.
  IntegratorBenchConfig fine = cfg;
  fine.methods = {Method::cm4};
  fine.dt_grid = {0.3, 0.2, 0.15};
  auto fine_result = integrator_benchmark(fine);

  // Each method fitted inside its own asymptotic window: cm2 is quadratic
  // from the top of the grid, cm6 and cm8 live between the cliff and the
  // double-precision floor.
  struct FitSpec {
    Method m;
    const IntegratorBenchResult* res;
    std::initializer_list<double> window;
  };
  const FitSpec fits[] = {
      {Method::cm2, &result, {4.0, 2.0, 1.0}},
      {Method::cm4, &fine_result, {0.3, 0.2, 0.15}},
      {Method::cm6, &result, {0.7, 0.5, 0.35}},
      {Method::cm8, &result, {1.0, 0.7, 0.5}},
  };
  for (const auto& f : fits) {
    double slope = fit_slope(*f.res, f.m, f.window);
    note << to_string(f.m) << " slope " << fmt(slope) << "; ";
    if (std::abs(slope - convergence_order(f.m)) > 0.3) pass = false;
  }

  // Cayley-Magnus runs never fail and stay below the drift budget everywhere.
  double max_cm_drift = 0.0;
  for (const auto* res : {&result, &fine_result}) {
    for (const auto& rec : res->records) {
      if (!is_cayley_magnus(rec.method)) continue;
      if (rec.failed) {
        pass = false;
        note << to_string(rec.method) << " failed at dt=" << rec.dt << "; ";
      }
      max_cm_drift = std::max(max_cm_drift, rec.orthogonality_drift);
    }
  }
  note << "max cm drift " << fmt(max_cm_drift) << "; ";
  if (max_cm_drift > 1e-12) pass = false;

  // Both baselines lose orthogonality at the coarsest step.
  for (Method m : {Method::rk_baseline5, Method::rk_baseline8}) {
    const auto* row = row_of(result, m, 8.0);
    bool drifted = row->failures == cfg.instances || row->median_drift > 1e-10;
    note << to_string(m) << "@8: failures " << row->failures << " drift "
         << fmt(row->median_drift) << "; ";
    if (!drifted) pass = false;
  }

  return {pass, note.str()};
}

// 9. Interval-split evolution matches the serial product.
Outcome check_interval_split() {
  auto inst = sample_logical(32, DisorderSpec::strong(909));
  AnnealSchedule sched{256.0};
  IntegratorConfig serial;
  serial.dt = 0.5;
  auto ref = integrate(inst, sched, serial);
  double ref_p0 = ground_state_probability(ref.matrix).p0;
  double worst_s = 0.0, worst_p = 0.0;
  for (int segments : {2, 4, 8}) {
    IntegratorConfig split = serial;
    split.parallel = {ParallelPlan::Kind::interval_split, segments};
    auto got = integrate(inst, sched, split);
    worst_s = std::max(worst_s, (got.matrix - ref.matrix).cwiseAbs().maxCoeff());
    worst_p = std::max(worst_p, std::abs(ground_state_probability(got.matrix).p0 - ref_p0));
  }
  bool pass = worst_s <= 1e-10 && worst_p <= 1e-8;
  return {pass, "max |dS| = " + fmt(worst_s) + " (tol 1e-10), max |dp0| = " + fmt(worst_p) +
                    " (tol 1e-8) for 2/4/8 segments"};
}

// 10. cm8 per-step cost is linear in the chain length.
Outcome check_linear_cost() {
  const int kCols = 8;
  const long kTimedSteps = 128;
  std::vector<double> xs, ys;
  std::ostringstream note;
  for (int n : {128, 256, 512, 1024, 2048, 4096}) {
    auto inst = sample_logical(n, DisorderSpec::strong(1010));
    AnnealSchedule sched{256.0};
    MagnusStepper stepper(inst, sched, Method::cm8, 1.0, 0.0, 256.0);
    int dim = stepper.dim();
    Eigen::MatrixXd block = Eigen::MatrixXd::Identity(dim, kCols);
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      for (long k = 0; k < 8; ++k) stepper.apply_step(k, block.data(), dim, kCols);
      auto start = std::chrono::steady_clock::now();
      for (long k = 8; k < 8 + kTimedSteps; ++k)
        stepper.apply_step(k, block.data(), dim, kCols);
      auto stop = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(stop - start).count() / kTimedSteps);
    }
    xs.push_back(static_cast<double>(n));
    ys.push_back(best);
    note << n << ":" << fmt(best * 1e6) << "us ";
  }
  auto fit = linear_fit(xs, ys);
  return {fit.r2 > 0.99, "per-step time vs N R2 = " + fmt(fit.r2) + " (need > 0.99); " + note.str()};
}

}  // namespace

int main() {
  using Entry = std::pair<const char*, std::function<Outcome()>>;
  std::vector<Entry> checks = {
      {"many-body spectrum matches dense diagonalization", check_spectrum_oracle},
      {"determinant p0 matches state-vector propagation", check_p0_oracle},
      {"identity evolution gives p0 = 2^(1-N)", check_identity_probability},
      {"uniform chain critical point and gap scaling", check_uniform_gap},
      {"strong-disorder median critical point", check_disorder_critical_point},
      {"gap scaling laws (stretched exponential vs power law)", check_gap_scaling},
      {"balanced embedding beats canonical (gap and tau)", check_embedding_ordering},
      {"integrator orders, drift bounds, baseline decay", check_integrator_benchmark},
      {"interval-split evolution matches serial", check_interval_split},
      {"cm8 per-step cost linear in N", check_linear_cost},
  };

  std::set<size_t> only;
  if (const char* filter = std::getenv("KINKFLOW_ACCEPT_ONLY")) {
    std::stringstream ss(filter);
    std::string tok;
    while (std::getline(ss, tok, ',')) only.insert(std::stoul(tok));
  }

  int failures = 0;
  for (size_t i = 0; i < checks.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    Outcome out;
    try {
      out = checks[i].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    if (!out.pass) ++failures;
    std::cout << "[" << (i + 1) << "/10] " << (out.pass ? "PASS" : "FAIL") << "  "
              << checks[i].first << "  --  " << out.detail << std::endl;
  }
  if (failures == 0)
    std::cout << "acceptance: all checks passed" << std::endl;
  else
    std::cout << "acceptance: " << failures << " check(s) failed" << std::endl;
  return failures;
}
