#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kinkflow/evolution.hpp"
#include "kinkflow/instance.hpp"
#include "kinkflow/stats.hpp"

namespace kinkflow {

// Floor used when p0 saturates the success probability; tau is then reported
// as t / |log(kSuccessFloor)| and the record is flagged.
inline constexpr double kSuccessFloor = 1e-16;

// Time to solution for a single shot: t / |log(1 - p0)|, natural log.
// p0 == 0 maps to +infinity. p0 >= 1 maps to the saturation floor.
double time_to_solution(double t, double p0, bool* saturated = nullptr);

// How an ensemble member is generated from a logical draw.
struct StudyConfig {
  DisorderKind disorder = DisorderKind::uniform_strong;
  EmbeddingKind embedding = EmbeddingKind::none;
  int block_size = 1;
  EdgeExponent edge = EdgeExponent::stabilized;
  double canonical_k = 1.0;
};

struct EnsembleStudy {
  std::vector<int> sizes;
  int instances_per_size = 50;
  std::vector<double> t_grid;  // shared anneal-time grid; empty -> per-size default
  int bootstrap_samples = 200;
  double ci_level = 0.90;
  std::uint64_t seed = 1;
  int workers = 1;
  double dt = 0.0;  // integration step for tts runs; 0 -> calibrated per size
};

// Seed for instance `index` of size `n` within a study.
std::uint64_t study_instance_seed(std::uint64_t study_seed, int n, int index);

// Instance realization for one ensemble member.
ChainInstance make_study_instance(const StudyConfig& config, int n,
                                  std::uint64_t seed);

// Default anneal-time grid: geometric, 16 points per decade, spanning
// [n / 4, 64 n^2].
std::vector<double> default_t_grid(int n);

// Smallest dt in {dt_start / 2^k} whose cm8 success probability differs from
// the half-step result by less than tol in relative terms, probed on `pilot`
// at horizon t_max.
double calibrate_dt(const ChainInstance& pilot, double t_max,
                    double dt_start = 1.0, double tol = 1e-8);

struct GapRecord {
  int n_logical = 0;
  int block_size = 1;
  EmbeddingKind embedding = EmbeddingKind::none;
  std::uint64_t seed = 0;
  double s_c = 0.0;
  double gap = 0.0;
  bool multimodal = false;
  bool precision = false;
};

struct GapStudyRow {
  int n = 0;
  int instances = 0;
  int excluded = 0;  // precision-flagged records left out of the aggregate
  double median_n_gap = 0.0;
  BootstrapCI ci;
};

struct GapStudyResult {
  StudyConfig config;
  std::vector<GapRecord> records;
  std::vector<GapStudyRow> rows;
};

GapStudyResult median_gap_study(const EnsembleStudy& study,
                                const StudyConfig& config);

struct TTSRecord {
  int n_logical = 0;
  int block_size = 1;
  EmbeddingKind embedding = EmbeddingKind::none;
  std::uint64_t seed = 0;
  double t = 0.0;
  double p0 = 0.0;
  double tau = 0.0;
  bool saturated = false;
  double orthogonality_drift = 0.0;
};

struct TtsStudyRow {
  int n = 0;
  double t_opt = 0.0;
  double median_tau = 0.0;       // at t_opt
  double median_tau_norm = 0.0;  // median_tau / n^2
  BootstrapCI ci;                // on median_tau_norm, covers draw + grid choice
  bool all_saturated = false;
  bool all_zero = false;
};

struct TtsGridPoint {
  int n = 0;
  double t = 0.0;
  double median_tau = 0.0;
};

struct TtsStudyResult {
  StudyConfig config;
  std::vector<TTSRecord> records;
  std::vector<TtsGridPoint> grid;  // per (size, anneal time) medians
  std::vector<TtsStudyRow> rows;
  double dt_used = 0.0;
};

TtsStudyResult median_tts_study(const EnsembleStudy& study,
                                const StudyConfig& config);

struct IntegratorBenchConfig {
  int n = 64;
  double t_final = 4096.0;
  int instances = 10;
  std::vector<double> dt_grid;
  std::vector<Method> methods = {Method::cm2,          Method::cm4,
                                 Method::cm6,          Method::cm8,
                                 Method::rk_baseline5, Method::rk_baseline8};
  DisorderKind disorder = DisorderKind::uniform_strong;
  std::uint64_t seed = 1;
  double reference_dt = 0.0;  // 0 -> finest entry of dt_grid
  int workers = 1;
};

struct IntegratorRunRecord {
  Method method = Method::cm8;
  double dt = 0.0;
  std::uint64_t seed = 0;
  double p0 = 0.0;
  double rel_error = 0.0;  // +inf when the run failed
  double orthogonality_drift = 0.0;
  double wall_ms = 0.0;
  bool failed = false;
};

struct IntegratorBenchRow {
  Method method = Method::cm8;
  double dt = 0.0;
  double median_rel_error = 0.0;
  double median_drift = 0.0;
  double median_wall_ms = 0.0;
  int failures = 0;
};

struct IntegratorBenchResult {
  std::vector<IntegratorRunRecord> records;
  std::vector<IntegratorBenchRow> rows;
  double reference_dt = 0.0;
};

IntegratorBenchResult integrator_benchmark(const IntegratorBenchConfig& config);

// CSV writers. Columns are fixed so downstream plotting stays stable.
void write_tts_raw_csv(std::ostream& out, const std::vector<TTSRecord>& records);
void write_tts_summary_csv(std::ostream& out, const TtsStudyResult& result);
void write_tts_plot_csv(std::ostream& out, const TtsStudyResult& result);
void write_gap_csv(std::ostream& out, const std::vector<GapRecord>& records);
void write_gap_summary_csv(std::ostream& out, const GapStudyResult& result);
void write_integrator_csv(std::ostream& out, const IntegratorBenchResult& result);

}  // namespace kinkflow
