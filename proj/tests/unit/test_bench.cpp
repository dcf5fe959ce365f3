#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "kinkflow/bench.hpp"
#include "kinkflow/errors.hpp"
#include "kinkflow/observables.hpp"
#include "kinkflow/rng.hpp"
#include "kinkflow/stats.hpp"

using namespace kinkflow;

namespace {

ChainInstance uniform_chain(int n, double j) {
  ChainInstance inst;
  inst.n_logical = n;
  inst.block_size = 1;
  inst.logical_couplings.assign(static_cast<std::size_t>(n - 1), j);
  inst.couplings = inst.logical_couplings;
  inst.validate();
  return inst;
}

bool same_tts(const TTSRecord& a, const TTSRecord& b) {
  return a.n_logical == b.n_logical && a.seed == b.seed && a.t == b.t &&
         a.p0 == b.p0 && a.tau == b.tau && a.saturated == b.saturated &&
         a.orthogonality_drift == b.orthogonality_drift;
}

}  // namespace

TEST_CASE("statistics helpers") {
  CHECK(median_of({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median_of({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median_of({7.0}) == 7.0);

  const std::vector<double> sorted = {1.0, 2.0, 3.0, 4.0};
  CHECK(percentile_sorted(sorted, 0.0) == 1.0);
  CHECK(percentile_sorted(sorted, 1.0) == 4.0);
  CHECK(percentile_sorted(sorted, 0.5) == 2.5);
  CHECK(percentile_sorted(sorted, 0.25) == doctest::Approx(1.75).epsilon(1e-14));

  const std::vector<double> vals = {0.4, 1.9, 0.7, 1.1, 0.2, 1.5, 0.9};
  std::vector<double> shuffled = {1.5, 0.2, 0.9, 0.4, 1.1, 1.9, 0.7};
  const auto ci1 = bootstrap_median_ci(vals, 200, 0.9, 77);
  const auto ci2 = bootstrap_median_ci(shuffled, 200, 0.9, 77);
  CHECK(ci1.lo == ci2.lo);
  CHECK(ci1.hi == ci2.hi);
  CHECK(ci1.lo <= ci1.hi);
  CHECK(ci1.lo >= 0.2);
  CHECK(ci1.hi <= 1.9);

  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(0.5 * i);
    y.push_back(3.0 * (0.5 * i) - 2.0);
  }
  const auto fit = linear_fit(x, y);
  CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("time to solution handles the boundary probabilities") {
  bool sat = true;
  CHECK(time_to_solution(10.0, 1.0 - std::exp(-1.0), &sat) ==
        doctest::Approx(10.0).epsilon(1e-12));
  CHECK_FALSE(sat);

  CHECK(time_to_solution(10.0, 0.5, &sat) ==
        doctest::Approx(10.0 / std::log(2.0)).epsilon(1e-12));
  CHECK_FALSE(sat);

  CHECK(std::isinf(time_to_solution(10.0, 0.0, &sat)));
  CHECK_FALSE(sat);

  CHECK(time_to_solution(10.0, 1.0, &sat) ==
        doctest::Approx(10.0 / (16.0 * std::log(10.0))).epsilon(1e-12));
  CHECK(sat);

  // Tiny probabilities must not lose precision to the 1 - p0 subtraction.
  CHECK(time_to_solution(1.0, 1e-13, nullptr) ==
        doctest::Approx(1e13).epsilon(1e-10));

  CHECK_THROWS_AS(time_to_solution(0.0, 0.5, nullptr), ValidationError);
  CHECK_THROWS_AS(time_to_solution(1.0, -0.1, nullptr), ValidationError);
}

TEST_CASE("study seeds derive deterministically and stay distinct") {
  CHECK(study_instance_seed(42, 16, 3) ==
        derive_seed(derive_seed(42, 16), 3));
  std::vector<std::uint64_t> seen;
  for (int n : {8, 16, 32})
    for (int i = 0; i < 20; ++i) seen.push_back(study_instance_seed(1, n, i));
  std::sort(seen.begin(), seen.end());
  CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("study instances realize the configured embedding") {
  StudyConfig plain;
  const auto logical = make_study_instance(plain, 6, 99);
  CHECK(logical.n_logical == 6);
  CHECK(logical.block_size == 1);
  CHECK(logical.embedding_kind == EmbeddingKind::none);
  CHECK(logical.seed == 99);

  StudyConfig canon;
  canon.embedding = EmbeddingKind::canonical;
  canon.block_size = 3;
  canon.canonical_k = 2.0;
  const auto c = make_study_instance(canon, 6, 99);
  CHECK(c.total_spins() == 18);
  CHECK(c.embedding_kind == EmbeddingKind::canonical);
  REQUIRE(c.block_couplings.size() == 6);
  for (double k : c.block_couplings) CHECK(k == 2.0);
  CHECK(c.logical_couplings == logical.logical_couplings);

  StudyConfig bal;
  bal.embedding = EmbeddingKind::balanced;
  bal.block_size = 3;
  const auto b = make_study_instance(bal, 6, 99);
  CHECK(b.embedding_kind == EmbeddingKind::balanced);
  CHECK(b.total_spins() == 18);
  REQUIRE(b.block_couplings.size() == 6);

  CHECK_THROWS_AS(make_study_instance(plain, 1, 5), ValidationError);
}

TEST_CASE("default time grid spans the configured window geometrically") {
  const auto grid = default_t_grid(8);
  REQUIRE(grid.size() > 10);
  CHECK(grid.front() == 2.0);
  CHECK(grid.back() == 4096.0);
  const double step = std::pow(10.0, 1.0 / 16.0);
  for (std::size_t i = 0; i + 2 < grid.size(); ++i)
    CHECK(grid[i + 1] / grid[i] == doctest::Approx(step).epsilon(1e-9));
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) CHECK(grid[i] < grid[i + 1]);
}

TEST_CASE("step calibration halves until the probability settles") {
  const auto pilot = uniform_chain(4, 0.8);
  const double dt = calibrate_dt(pilot, 8.0, 1.0, 1e-8);
  CHECK(dt > 0.0);
  CHECK(dt <= 1.0);
  const double k = std::log2(1.0 / dt);
  CHECK(k == doctest::Approx(std::round(k)).epsilon(1e-12));
  CHECK(dt == calibrate_dt(pilot, 8.0, 1.0, 1e-8));

  const auto tiny = uniform_chain(3, 0.7);
  CHECK_THROWS_AS(calibrate_dt(tiny, 2.0, 1.0, 1e-30), NumericError);
}

TEST_CASE("gap study aggregates per size and is reproducible") {
  EnsembleStudy study;
  study.sizes = {24, 32};
  study.instances_per_size = 5;
  study.bootstrap_samples = 50;
  study.seed = 2;
  StudyConfig config;

  const auto a = median_gap_study(study, config);
  REQUIRE(a.rows.size() == 2);
  REQUIRE(a.records.size() == 10);
  for (const auto& row : a.rows) {
    CHECK(row.instances == 5);
    CHECK(row.excluded >= 0);
    CHECK(row.excluded < row.instances);
    CHECK(row.median_n_gap > 0.0);
    CHECK(row.ci.lo <= row.median_n_gap);
    CHECK(row.ci.hi >= row.median_n_gap);
  }
  for (const auto& rec : a.records) {
    CHECK(rec.s_c > 0.0);
    CHECK(rec.s_c < 1.0);
    CHECK(rec.gap > 0.0);
  }

  study.workers = 3;
  const auto b = median_gap_study(study, config);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].seed == b.records[i].seed);
    CHECK(a.records[i].s_c == b.records[i].s_c);
    CHECK(a.records[i].gap == b.records[i].gap);
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].median_n_gap == b.rows[i].median_n_gap);
    CHECK(a.rows[i].ci.lo == b.rows[i].ci.lo);
    CHECK(a.rows[i].ci.hi == b.rows[i].ci.hi);
  }
}

TEST_CASE("tts study locates the grid optimum deterministically") {
  EnsembleStudy study;
  study.sizes = {6};
  study.instances_per_size = 4;
  study.t_grid = {2.0, 4.0, 8.0};
  study.bootstrap_samples = 50;
  study.seed = 3;
  study.dt = 0.5;
  StudyConfig config;

  const auto a = median_tts_study(study, config);
  REQUIRE(a.rows.size() == 1);
  REQUIRE(a.records.size() == 12);
  REQUIRE(a.grid.size() == 3);
  const auto& row = a.rows[0];
  CHECK(row.n == 6);
  CHECK((row.t_opt == 2.0 || row.t_opt == 4.0 || row.t_opt == 8.0));
  CHECK(row.median_tau > 0.0);
  CHECK(row.median_tau_norm == row.median_tau / 36.0);
  CHECK_FALSE(row.all_saturated);
  CHECK_FALSE(row.all_zero);
  CHECK(row.ci.lo <= row.ci.hi);
  double best = a.grid[0].median_tau;
  for (const auto& g : a.grid) best = std::min(best, g.median_tau);
  CHECK(row.median_tau == best);
  CHECK(a.dt_used == 0.5);
  for (const auto& rec : a.records) {
    CHECK(rec.p0 > 0.0);
    CHECK(rec.tau == time_to_solution(rec.t, rec.p0, nullptr));
    CHECK(rec.orthogonality_drift < 1e-12);
  }

  study.workers = 3;
  const auto b = median_tts_study(study, config);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(same_tts(a.records[i], b.records[i]));
  CHECK(a.rows[0].t_opt == b.rows[0].t_opt);
  CHECK(a.rows[0].ci.lo == b.rows[0].ci.lo);
  CHECK(a.rows[0].ci.hi == b.rows[0].ci.hi);
}

TEST_CASE("integrator benchmark measures error against its finest reference") {
  IntegratorBenchConfig config;
  config.n = 6;
  config.t_final = 8.0;
  config.instances = 2;
  config.dt_grid = {0.5, 0.25};
  config.methods = {Method::cm2, Method::cm8};
  config.seed = 3;

  const auto res = integrator_benchmark(config);
  CHECK(res.reference_dt == 0.25);
  REQUIRE(res.rows.size() == 4);
  REQUIRE(res.records.size() == 8);

  auto row_of = [&](Method m, double dt) {
    for (const auto& r : res.rows)
      if (r.method == m && r.dt == dt) return r;
    REQUIRE(false);
    return res.rows[0];
  };
  CHECK(row_of(Method::cm8, 0.25).median_rel_error == 0.0);
  CHECK(row_of(Method::cm2, 0.5).median_rel_error >
        row_of(Method::cm8, 0.5).median_rel_error);
  for (const auto& r : res.rows) {
    CHECK(r.failures == 0);
    CHECK(r.median_drift < 1e-12);
    CHECK(r.median_wall_ms >= 0.0);
  }

  const auto res2 = integrator_benchmark(config);
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    CHECK(res.records[i].p0 == res2.records[i].p0);
    CHECK(res.records[i].rel_error == res2.records[i].rel_error);
    CHECK(res.records[i].failed == res2.records[i].failed);
  }

  config.dt_grid = {};
  CHECK_THROWS_AS(integrator_benchmark(config), ValidationError);
}

TEST_CASE("csv writers emit fixed headers and lossless values") {
  TTSRecord rec;
  rec.n_logical = 6;
  rec.block_size = 1;
  rec.embedding = EmbeddingKind::none;
  rec.seed = 123;
  rec.t = 4.0;
  rec.p0 = 0.0;
  rec.tau = std::numeric_limits<double>::infinity();
  rec.saturated = false;
  rec.orthogonality_drift = 0.1 + 0.2;

  std::ostringstream raw;
  write_tts_raw_csv(raw, {rec});
  const std::string text = raw.str();
  CHECK(text.rfind("n,m,embedding,seed,t,p0,tau,saturated,orthogonality_drift\n",
                   0) == 0);
  CHECK(text.find(",inf,") != std::string::npos);
  CHECK(text.find("0.30000000000000004") != std::string::npos);

  GapRecord grec;
  grec.n_logical = 8;
  grec.seed = 7;
  grec.s_c = 0.73;
  grec.gap = 1e-5;
  grec.multimodal = true;
  std::ostringstream gap;
  write_gap_csv(gap, {grec});
  CHECK(gap.str().rfind("n,m,embedding,seed,s_c,gap,flag_multimodal,flag_precision\n",
                        0) == 0);
  CHECK(gap.str().find(",1,0\n") != std::string::npos);

  EnsembleStudy study;
  study.sizes = {6};
  study.instances_per_size = 3;
  study.t_grid = {2.0, 4.0};
  study.bootstrap_samples = 20;
  study.dt = 0.5;
  const auto tts = median_tts_study(study, StudyConfig{});
  std::ostringstream summary, plot;
  write_tts_summary_csv(summary, tts);
  write_tts_plot_csv(plot, tts);
  CHECK(summary.str().rfind(
            "n,t_opt,median_tau,median_tau_norm,ci_lo,ci_hi,all_saturated,all_zero\n",
            0) == 0);
  const std::string plot_text = plot.str();
  CHECK(plot_text.rfind("x,y,y_lo,y_hi\n", 0) == 0);
  CHECK(std::count(plot_text.begin(), plot_text.end(), '\n') == 2);

  EnsembleStudy gstudy;
  gstudy.sizes = {24};
  gstudy.instances_per_size = 3;
  gstudy.bootstrap_samples = 20;
  const auto gaps = median_gap_study(gstudy, StudyConfig{});
  std::ostringstream gsum;
  write_gap_summary_csv(gsum, gaps);
  CHECK(gsum.str().rfind("n,instances,excluded,median_n_gap,ci_lo,ci_hi\n", 0) == 0);

  IntegratorBenchConfig icfg;
  icfg.n = 4;
  icfg.t_final = 4.0;
  icfg.instances = 1;
  icfg.dt_grid = {0.5};
  icfg.methods = {Method::cm8};
  const auto bench = integrator_benchmark(icfg);
  std::ostringstream ib;
  write_integrator_csv(ib, bench);
  CHECK(ib.str().rfind("method,dt,median_rel_error,orthogonality_drift,wall_ms,failures\n",
                       0) == 0);
  CHECK(ib.str().find("cm8,0.5,0,") != std::string::npos);
}
