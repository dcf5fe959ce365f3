#include "kinkflow/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <thread>

#include "kinkflow/errors.hpp"
#include "kinkflow/observables.hpp"
#include "kinkflow/rng.hpp"
#include "kinkflow/spectrum.hpp"

namespace kinkflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs tasks [0, count) on up to `workers` threads. Tasks must write to
// disjoint slots; results stay in deterministic (index) order.
void run_indexed(int count, int workers, const std::function<void(int)>& task) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

struct AnnealOutcome {
  double p0 = 0.0;
  double drift = 0.0;
  bool failed = false;
};

AnnealOutcome run_anneal(const ChainInstance& inst, double t_final, Method method,
                         double dt) {
  AnnealOutcome out;
  try {
    AnnealSchedule sched{t_final};
    IntegratorConfig cfg;
    cfg.method = method;
    cfg.dt = dt;
    EvolutionOperator evo = integrate(inst, sched, cfg);
    ProbabilityResult pr = ground_state_probability(evo.matrix);
    out.p0 = pr.p0;
    out.drift = evo.orthogonality_drift;
  } catch (const NumericError&) {
    out.failed = true;
    out.drift = kInf;
  }
  return out;
}

std::uint64_t bootstrap_seed(std::uint64_t study_seed, int n) {
  return derive_seed(study_seed, 0x63690000ull + static_cast<std::uint64_t>(n));
}

double fmt_guard(double v) { return std::isfinite(v) ? v : kInf; }

void csv_value(std::ostream& out, double v) {
  if (std::isinf(v)) {
    out << (v > 0 ? "inf" : "-inf");
  } else {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  }
}

}  // namespace

double time_to_solution(double t, double p0, bool* saturated) {
  require(t > 0.0, "time to solution needs a positive anneal time");
  require(p0 >= 0.0, "success probability must be non-negative");
  if (saturated) *saturated = false;
  if (p0 == 0.0) return kInf;
  if (p0 >= 1.0) {
    if (saturated) *saturated = true;
    return t / std::abs(std::log(kSuccessFloor));
  }
  return t / std::abs(std::log1p(-p0));
}

std::uint64_t study_instance_seed(std::uint64_t study_seed, int n, int index) {
  return derive_seed(derive_seed(study_seed, static_cast<std::uint64_t>(n)),
                     static_cast<std::uint64_t>(index));
}

ChainInstance make_study_instance(const StudyConfig& config, int n,
                                  std::uint64_t seed) {
  require(n >= 2, "study instances need at least two logical spins");
  DisorderSpec spec = (config.disorder == DisorderKind::uniform_strong)
                          ? DisorderSpec::strong(seed)
                          : DisorderSpec::scaled(config.block_size, seed);
  ChainInstance logical = sample_logical(n, spec);
  switch (config.embedding) {
    case EmbeddingKind::none:
      return logical;
    case EmbeddingKind::canonical:
      return embed_canonical(logical, config.block_size, config.canonical_k);
    case EmbeddingKind::balanced: {
      BalancedOptions opts;
      opts.edge = config.edge;
      return embed_balanced(logical, config.block_size, opts);
    }
  }
  throw ValidationError("unknown embedding kind");
}

std::vector<double> default_t_grid(int n) {
  require(n >= 2, "time grid needs n >= 2");
  const double lo = static_cast<double>(n) / 4.0;
  const double hi = 64.0 * static_cast<double>(n) * static_cast<double>(n);
  const double step = std::pow(10.0, 1.0 / 16.0);
  std::vector<double> grid;
  for (double t = lo; t < hi * (1.0 + 1e-12); t *= step) grid.push_back(t);
  if (grid.back() < hi) grid.push_back(hi);
  return grid;
}

double calibrate_dt(const ChainInstance& pilot, double t_max, double dt_start,
                    double tol) {
  require(dt_start > 0.0 && tol > 0.0, "calibration needs positive dt and tol");
  double dt = dt_start;
  AnnealOutcome coarse = run_anneal(pilot, t_max, Method::cm8, dt);
  for (int k = 0; k < 16; ++k) {
    AnnealOutcome fine = run_anneal(pilot, t_max, Method::cm8, dt / 2.0);
    if (!coarse.failed && !fine.failed) {
      const double scale = std::max(std::abs(fine.p0), 1e-300);
      if (std::abs(coarse.p0 - fine.p0) / scale < tol) return dt;
    }
    dt /= 2.0;
    coarse = fine;
  }
  throw NumericError("step calibration did not converge");
}

GapStudyResult median_gap_study(const EnsembleStudy& study,
                                const StudyConfig& config) {
  require(!study.sizes.empty(), "gap study needs at least one size");
  require(study.instances_per_size > 0, "gap study needs instances");
  GapStudyResult result;
  result.config = config;
  for (int n : study.sizes) {
    const int count = study.instances_per_size;
    std::vector<GapRecord> recs(static_cast<std::size_t>(count));
    run_indexed(count, study.workers, [&](int i) {
      const std::uint64_t seed = study_instance_seed(study.seed, n, i);
      const ChainInstance inst = make_study_instance(config, n, seed);
      const MinimumGapResult mg = minimum_gap(inst);
      GapRecord rec;
      rec.n_logical = n;
      rec.block_size = inst.block_size;
      rec.embedding = inst.embedding_kind;
      rec.seed = seed;
      rec.s_c = mg.s_c;
      rec.gap = mg.gap;
      rec.multimodal = mg.multimodal;
      rec.precision = mg.precision_flag;
      recs[static_cast<std::size_t>(i)] = rec;
    });
    GapStudyRow row;
    row.n = n;
    row.instances = count;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(count));
    for (const GapRecord& rec : recs) {
      if (rec.precision) {
        ++row.excluded;
      } else {
        values.push_back(static_cast<double>(n) * rec.gap);
      }
    }
    require(!values.empty(), "every instance was precision-flagged");
    row.median_n_gap = median_of(values);
    row.ci = bootstrap_median_ci(values, study.bootstrap_samples, study.ci_level,
                                 bootstrap_seed(study.seed, n));
    result.rows.push_back(row);
    result.records.insert(result.records.end(), recs.begin(), recs.end());
  }
  return result;
}

TtsStudyResult median_tts_study(const EnsembleStudy& study,
                                const StudyConfig& config) {
  require(!study.sizes.empty(), "tts study needs at least one size");
  require(study.instances_per_size > 0, "tts study needs instances");
  TtsStudyResult result;
  result.config = config;
  const int count = study.instances_per_size;
  for (int n : study.sizes) {
    const std::vector<double> t_grid =
        study.t_grid.empty() ? default_t_grid(n) : study.t_grid;
    require(!t_grid.empty(), "tts study needs a non-empty time grid");
    double dt = study.dt;
    if (dt <= 0.0) {
      const ChainInstance pilot =
          make_study_instance(config, n, study_instance_seed(study.seed, n, 0));
      dt = calibrate_dt(pilot, t_grid.back());
    }
    result.dt_used = dt;

    const int n_t = static_cast<int>(t_grid.size());
    std::vector<TTSRecord> recs(static_cast<std::size_t>(count) *
                                static_cast<std::size_t>(n_t));
    run_indexed(count * n_t, study.workers, [&](int task) {
      const int i = task / n_t;
      const int ti = task % n_t;
      const std::uint64_t seed = study_instance_seed(study.seed, n, i);
      const ChainInstance inst = make_study_instance(config, n, seed);
      const double t_final = t_grid[static_cast<std::size_t>(ti)];
      const AnnealOutcome out = run_anneal(inst, t_final, Method::cm8, dt);
      TTSRecord rec;
      rec.n_logical = n;
      rec.block_size = inst.block_size;
      rec.embedding = inst.embedding_kind;
      rec.seed = seed;
      rec.t = t_final;
      rec.p0 = out.failed ? 0.0 : out.p0;
      rec.tau = time_to_solution(t_final, rec.p0, &rec.saturated);
      rec.orthogonality_drift = out.drift;
      recs[static_cast<std::size_t>(task)] = rec;
    });

    // tau matrix indexed [instance][time]; medians taken column-wise.
    auto tau_at = [&](int i, int ti) {
      return recs[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_t) +
                  static_cast<std::size_t>(ti)]
          .tau;
    };
    std::vector<double> med_tau(static_cast<std::size_t>(n_t));
    for (int ti = 0; ti < n_t; ++ti) {
      std::vector<double> col(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) col[static_cast<std::size_t>(i)] = tau_at(i, ti);
      med_tau[static_cast<std::size_t>(ti)] = median_of(col);
      result.grid.push_back({n, t_grid[static_cast<std::size_t>(ti)],
                             med_tau[static_cast<std::size_t>(ti)]});
    }
    int opt = 0;
    for (int ti = 1; ti < n_t; ++ti) {
      if (med_tau[static_cast<std::size_t>(ti)] <
          med_tau[static_cast<std::size_t>(opt)]) {
        opt = ti;
      }
    }

    TtsStudyRow row;
    row.n = n;
    row.t_opt = t_grid[static_cast<std::size_t>(opt)];
    row.median_tau = med_tau[static_cast<std::size_t>(opt)];
    const double norm = static_cast<double>(n) * static_cast<double>(n);
    row.median_tau_norm = row.median_tau / norm;
    row.all_saturated = true;
    row.all_zero = true;
    for (int i = 0; i < count; ++i) {
      const TTSRecord& rec =
          recs[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_t) +
               static_cast<std::size_t>(opt)];
      row.all_saturated = row.all_saturated && rec.saturated;
      row.all_zero = row.all_zero && (rec.p0 == 0.0);
    }

    // Bootstrap over instances; the optimum is re-located inside every
    // replicate so the interval also reflects grid-point uncertainty.
    {
      Rng rng(bootstrap_seed(study.seed, n), 0x74747362);
      std::vector<int> order(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return recs[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_t)]
                   .seed <
               recs[static_cast<std::size_t>(b) * static_cast<std::size_t>(n_t)]
                   .seed;
      });
      std::vector<double> stats;
      stats.reserve(static_cast<std::size_t>(study.bootstrap_samples));
      std::vector<double> col(static_cast<std::size_t>(count));
      for (int b = 0; b < study.bootstrap_samples; ++b) {
        std::vector<int> pick(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
          pick[static_cast<std::size_t>(i)] =
              order[rng.next_u64() % static_cast<std::uint64_t>(count)];
        }
        double best = kInf;
        for (int ti = 0; ti < n_t; ++ti) {
          for (int i = 0; i < count; ++i) {
            col[static_cast<std::size_t>(i)] =
                tau_at(pick[static_cast<std::size_t>(i)], ti);
          }
          best = std::min(best, median_of(col));
        }
        stats.push_back(best / norm);
      }
      std::sort(stats.begin(), stats.end());
      const double alpha = 0.5 * (1.0 - study.ci_level);
      row.ci = {percentile_sorted(stats, alpha),
                percentile_sorted(stats, 1.0 - alpha)};
    }
    result.rows.push_back(row);
    result.records.insert(result.records.end(), recs.begin(), recs.end());
  }
  return result;
}

IntegratorBenchResult integrator_benchmark(const IntegratorBenchConfig& config) {
  require(!config.dt_grid.empty(), "integrator benchmark needs a dt grid");
  require(config.instances > 0, "integrator benchmark needs instances");
  require(!config.methods.empty(), "integrator benchmark needs methods");
  std::vector<double> dts(config.dt_grid);
  std::sort(dts.begin(), dts.end());
  IntegratorBenchResult result;
  result.reference_dt = config.reference_dt > 0.0 ? config.reference_dt : dts.front();

  StudyConfig icfg;
  icfg.disorder = config.disorder;
  const int count = config.instances;
  std::vector<double> ref_p0(static_cast<std::size_t>(count));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  run_indexed(count, config.workers, [&](int i) {
    const std::uint64_t seed = study_instance_seed(config.seed, config.n, i);
    seeds[static_cast<std::size_t>(i)] = seed;
    const ChainInstance inst = make_study_instance(icfg, config.n, seed);
    const AnnealOutcome out =
        run_anneal(inst, config.t_final, Method::cm8, result.reference_dt);
    require(!out.failed, "reference integration failed");
    ref_p0[static_cast<std::size_t>(i)] = out.p0;
  });

  struct Task {
    Method method;
    double dt;
    int instance;
  };
  std::vector<Task> tasks;
  for (Method m : config.methods) {
    for (double dt : dts) {
      for (int i = 0; i < count; ++i) tasks.push_back({m, dt, i});
    }
  }
  std::vector<IntegratorRunRecord> recs(tasks.size());
  run_indexed(static_cast<int>(tasks.size()), config.workers, [&](int ix) {
    const Task& task = tasks[static_cast<std::size_t>(ix)];
    const ChainInstance inst = make_study_instance(
        icfg, config.n, seeds[static_cast<std::size_t>(task.instance)]);
    const auto start = std::chrono::steady_clock::now();
    const AnnealOutcome out = run_anneal(inst, config.t_final, task.method, task.dt);
    const auto stop = std::chrono::steady_clock::now();
    IntegratorRunRecord rec;
    rec.method = task.method;
    rec.dt = task.dt;
    rec.seed = seeds[static_cast<std::size_t>(task.instance)];
    rec.p0 = out.p0;
    rec.failed = out.failed;
    const double ref = ref_p0[static_cast<std::size_t>(task.instance)];
    rec.rel_error = out.failed
                        ? kInf
                        : std::abs(out.p0 - ref) / std::max(std::abs(ref), 1e-300);
    rec.orthogonality_drift = out.drift;
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(stop - start).count();
    recs[static_cast<std::size_t>(ix)] = rec;
  });
  result.records = recs;

  for (Method m : config.methods) {
    for (double dt : dts) {
      std::vector<double> errs, drifts, walls;
      int failures = 0;
      for (const IntegratorRunRecord& rec : recs) {
        if (rec.method != m || rec.dt != dt) continue;
        errs.push_back(fmt_guard(rec.rel_error));
        drifts.push_back(fmt_guard(rec.orthogonality_drift));
        walls.push_back(rec.wall_ms);
        if (rec.failed) ++failures;
      }
      IntegratorBenchRow row;
      row.method = m;
      row.dt = dt;
      row.median_rel_error = median_of(errs);
      row.median_drift = median_of(drifts);
      row.median_wall_ms = median_of(walls);
      row.failures = failures;
      result.rows.push_back(row);
    }
  }
  return result;
}

void write_tts_raw_csv(std::ostream& out, const std::vector<TTSRecord>& records) {
  out << "n,m,embedding,seed,t,p0,tau,saturated,orthogonality_drift\n";
  for (const TTSRecord& r : records) {
    out << r.n_logical << ',' << r.block_size << ',' << to_string(r.embedding)
        << ',' << r.seed << ',';
    csv_value(out, r.t);
    out << ',';
    csv_value(out, r.p0);
    out << ',';
    csv_value(out, r.tau);
    out << ',' << (r.saturated ? 1 : 0) << ',';
    csv_value(out, r.orthogonality_drift);
    out << '\n';
  }
}

void write_tts_summary_csv(std::ostream& out, const TtsStudyResult& result) {
  out << "n,t_opt,median_tau,median_tau_norm,ci_lo,ci_hi,all_saturated,all_zero\n";
  for (const TtsStudyRow& r : result.rows) {
    out << r.n << ',';
    csv_value(out, r.t_opt);
    out << ',';
    csv_value(out, r.median_tau);
    out << ',';
    csv_value(out, r.median_tau_norm);
    out << ',';
    csv_value(out, r.ci.lo);
    out << ',';
    csv_value(out, r.ci.hi);
    out << ',' << (r.all_saturated ? 1 : 0) << ',' << (r.all_zero ? 1 : 0) << '\n';
  }
}

void write_tts_plot_csv(std::ostream& out, const TtsStudyResult& result) {
  out << "x,y,y_lo,y_hi\n";
  for (const TtsStudyRow& r : result.rows) {
    out << r.n << ',';
    csv_value(out, r.median_tau_norm);
    out << ',';
    csv_value(out, r.ci.lo);
    out << ',';
    csv_value(out, r.ci.hi);
    out << '\n';
  }
}

void write_gap_csv(std::ostream& out, const std::vector<GapRecord>& records) {
  out << "n,m,embedding,seed,s_c,gap,flag_multimodal,flag_precision\n";
  for (const GapRecord& r : records) {
    out << r.n_logical << ',' << r.block_size << ',' << to_string(r.embedding)
        << ',' << r.seed << ',';
    csv_value(out, r.s_c);
    out << ',';
    csv_value(out, r.gap);
    out << ',' << (r.multimodal ? 1 : 0) << ',' << (r.precision ? 1 : 0) << '\n';
  }
}

void write_gap_summary_csv(std::ostream& out, const GapStudyResult& result) {
  out << "n,instances,excluded,median_n_gap,ci_lo,ci_hi\n";
  for (const GapStudyRow& r : result.rows) {
    out << r.n << ',' << r.instances << ',' << r.excluded << ',';
    csv_value(out, r.median_n_gap);
    out << ',';
    csv_value(out, r.ci.lo);
    out << ',';
    csv_value(out, r.ci.hi);
    out << '\n';
  }
}

void write_integrator_csv(std::ostream& out, const IntegratorBenchResult& result) {
  out << "method,dt,median_rel_error,orthogonality_drift,wall_ms,failures\n";
  for (const IntegratorBenchRow& r : result.rows) {
    out << to_string(r.method) << ',';
    csv_value(out, r.dt);
    out << ',';
    csv_value(out, r.median_rel_error);
    out << ',';
    csv_value(out, r.median_drift);
    out << ',';
    csv_value(out, r.median_wall_ms);
    out << ',' << r.failures << '\n';
  }
}

}  // namespace kinkflow
