#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kinkflow/bench.hpp"
#include "kinkflow/errors.hpp"
#include "kinkflow/evolution.hpp"
#include "kinkflow/instance.hpp"
#include "kinkflow/manifest.hpp"
#include "kinkflow/observables.hpp"
#include "kinkflow/spectrum.hpp"
#include "kinkflow/version.hpp"

namespace {

using kinkflow::require;
using kinkflow::ValidationError;

// Config file support: JSON object whose keys are long option names with
// underscores. Values apply only where the command line left the default,
// so precedence is flags > config file > defaults.
class ConfigOverlay {
 public:
  explicit ConfigOverlay(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", path_, "JSON config file (flags win)");
  }

  void load() {
    if (path_.empty()) return;
    std::ifstream in(path_);
    require(in.good(), "cannot open config file: " + path_);
    try {
      json_ = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("bad config file: ") + e.what());
    }
    require(json_.is_object(), "config file must hold a JSON object");
    for (const auto& item : json_.items()) {
      std::string flag = "--" + item.key();
      for (auto& c : flag) {
        if (c == '_') c = '-';
      }
      require(cmd_->get_option_no_throw(flag) != nullptr,
              "unknown config key: " + item.key());
    }
  }

  template <typename T>
  void apply(const std::string& flag, T& value) const {
    if (json_.is_null()) return;
    const CLI::Option* opt = cmd_->get_option(flag);
    if (opt->count() > 0) return;
    std::string key = flag.substr(2);
    for (auto& c : key) {
      if (c == '-') c = '_';
    }
    if (json_.contains(key)) value = json_.at(key).get<T>();
  }

 private:
  CLI::App* cmd_;
  std::string path_;
  nlohmann::json json_;
};

int env_workers() {
  if (const char* env = std::getenv("KINKFLOW_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

std::vector<double> parse_grid(const std::string& text) {
  // "lo:hi:count" expands geometrically; otherwise a comma list.
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double lo = 0, hi = 0;
    int count = 0;
    require(std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &count) == 3,
            "grid must be lo:hi:count or a comma list: " + text);
    require(lo > 0 && hi > lo && count >= 2, "bad geometric grid: " + text);
    const double r = std::pow(hi / lo, 1.0 / (count - 1));
    for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(r, i));
    return out;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  require(!out.empty(), "empty grid: " + text);
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoi(tok));
  }
  require(!out.empty(), "empty list: " + text);
  return out;
}

kinkflow::ParallelPlan parse_parallel(const std::string& text) {
  kinkflow::ParallelPlan plan;
  if (text == "serial" || text.empty()) return plan;
  const auto eq = text.find('=');
  require(eq != std::string::npos, "parallel must be serial, columns=K, or intervals=K");
  const std::string kind = text.substr(0, eq);
  const int n = std::stoi(text.substr(eq + 1));
  require(n >= 1, "parallel worker count must be >= 1");
  if (kind == "columns") {
    plan.kind = kinkflow::ParallelPlan::Kind::column_split;
  } else if (kind == "intervals") {
    plan.kind = kinkflow::ParallelPlan::Kind::interval_split;
  } else {
    throw ValidationError("parallel must be serial, columns=K, or intervals=K");
  }
  plan.n = n;
  return plan;
}

void dump_matrix(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open dump file: " + path);
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  std::vector<double> row(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  require(out.good(), "failed writing dump file: " + path);
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot open output file: " + path.string());
  fn(out);
  require(out.good(), "failed writing output file: " + path.string());
}

std::vector<std::string> collect_argv(int argc, char** argv) {
  return std::vector<std::string>(argv, argv + argc);
}

struct OutDir {
  std::filesystem::path dir;

  explicit OutDir(const std::string& d) : dir(d) {
    std::filesystem::create_directories(dir);
  }

  void manifest(const std::vector<std::string>& argv, const nlohmann::ordered_json& cfg,
                const std::vector<std::uint64_t>& seeds) const {
    auto m = kinkflow::RunManifest::make(argv, cfg.dump(), seeds);
    kinkflow::save_manifest(m, (dir / "manifest.json").string());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinkflow: disordered Ising chain annealing toolkit"};
  app.set_version_flag("--version", std::string("kinkflow ") + kinkflow::kVersion);
  app.require_subcommand(1);
  const std::vector<std::string> full_argv = collect_argv(argc, argv);

  // gen
  auto* gen = app.add_subcommand("gen", "Sample a chain instance and write it as JSON");
  int gen_n = 64;
  std::string gen_disorder = "strong";
  std::uint64_t gen_seed = 1;
  std::string gen_embedding = "none";
  int gen_m = 3;
  std::string gen_edge = "standard";
  double gen_k = 1.0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "logical spins");
  gen->add_option("--disorder", gen_disorder, "strong|scaled")
      ->check(CLI::IsMember({"strong", "scaled"}));
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--embedding", gen_embedding, "none|canonical|balanced")
      ->check(CLI::IsMember({"none", "canonical", "balanced"}));
  gen->add_option("--m", gen_m, "block size for embedding / scaled disorder");
  gen->add_option("--edge", gen_edge, "standard|stabilized edge rule")
      ->check(CLI::IsMember({"standard", "stabilized"}));
  gen->add_option("--k", gen_k, "canonical intra-block coupling");
  gen->add_option("--out", gen_out, "output instance file")->required();
  ConfigOverlay gen_cfg(gen);

  // gap
  auto* gap = app.add_subcommand("gap", "Minimum spectral gap of one instance or an ensemble");
  std::string gap_instance;
  std::string gap_out;
  std::string gap_sizes;
  int gap_per_size = 50;
  std::string gap_disorder = "strong";
  std::string gap_embedding = "none";
  int gap_m = 3;
  std::string gap_edge = "stabilized";
  std::uint64_t gap_seed = 1;
  int gap_bootstrap = 200;
  std::string gap_out_dir = "gap_out";
  int gap_workers = env_workers();
  gap->add_option("--instance", gap_instance, "instance JSON file (single mode)");
  gap->add_option("--out", gap_out, "CSV output file (single mode; default stdout)");
  gap->add_option("--sizes", gap_sizes, "comma list of sizes (ensemble mode)");
  gap->add_option("--per-size", gap_per_size, "instances per size");
  gap->add_option("--disorder", gap_disorder, "strong|scaled")
      ->check(CLI::IsMember({"strong", "scaled"}));
  gap->add_option("--embedding", gap_embedding, "none|canonical|balanced")
      ->check(CLI::IsMember({"none", "canonical", "balanced"}));
  gap->add_option("--m", gap_m, "block size");
  gap->add_option("--edge", gap_edge, "standard|stabilized edge rule")
      ->check(CLI::IsMember({"standard", "stabilized"}));
  gap->add_option("--seed", gap_seed, "ensemble seed");
  gap->add_option("--bootstrap", gap_bootstrap, "bootstrap samples");
  gap->add_option("--out-dir", gap_out_dir, "output directory (ensemble mode)");
  gap->add_option("--workers", gap_workers, "parallel workers");
  ConfigOverlay gap_cfg(gap);

  // evolve
  auto* evolve = app.add_subcommand("evolve", "Integrate the anneal propagator");
  std::string ev_instance;
  double ev_t_final = 0.0;
  double ev_t_start = 0.0;
  double ev_dt = 1.0;
  std::string ev_method = "cm8";
  std::string ev_parallel = "serial";
  std::string ev_dump;
  evolve->add_option("--instance", ev_instance, "instance JSON file")->required();
  evolve->add_option("--t-final", ev_t_final, "total anneal time")->required();
  evolve->add_option("--t-start", ev_t_start, "start of the integrated interval");
  evolve->add_option("--dt", ev_dt, "step size");
  evolve->add_option("--method", ev_method, "cm2|cm4|cm6|cm8|rk5|rk8");
  evolve->add_option("--parallel", ev_parallel, "serial|columns=K|intervals=K");
  evolve->add_option("--dump-s", ev_dump, "dump propagator (binary64, row-major, dims header)");
  ConfigOverlay ev_cfg(evolve);

  // p0
  auto* p0 = app.add_subcommand("p0", "Ground-state success probability after the anneal");
  std::string p0_instance;
  double p0_t_final = 0.0;
  double p0_dt = 1.0;
  std::string p0_method = "cm8";
  std::string p0_parallel = "serial";
  p0->add_option("--instance", p0_instance, "instance JSON file")->required();
  p0->add_option("--t-final", p0_t_final, "total anneal time")->required();
  p0->add_option("--dt", p0_dt, "step size");
  p0->add_option("--method", p0_method, "cm2|cm4|cm6|cm8|rk5|rk8");
  p0->add_option("--parallel", p0_parallel, "serial|columns=K|intervals=K");
  ConfigOverlay p0_cfg(p0);

  // tts
  auto* tts = app.add_subcommand("tts", "Median time-to-solution study over an ensemble");
  std::string tts_sizes = "8";
  int tts_per_size = 50;
  std::string tts_disorder = "strong";
  std::string tts_embedding = "none";
  int tts_m = 3;
  std::string tts_edge = "stabilized";
  std::string tts_t_grid = "auto";
  double tts_dt = 0.0;
  std::uint64_t tts_seed = 1;
  int tts_bootstrap = 200;
  std::string tts_out_dir = "tts_out";
  int tts_workers = env_workers();
  tts->add_option("--sizes", tts_sizes, "comma list of logical sizes");
  tts->add_option("--per-size", tts_per_size, "instances per size");
  tts->add_option("--disorder", tts_disorder, "strong|scaled")
      ->check(CLI::IsMember({"strong", "scaled"}));
  tts->add_option("--embedding", tts_embedding, "none|canonical|balanced")
      ->check(CLI::IsMember({"none", "canonical", "balanced"}));
  tts->add_option("--m", tts_m, "block size");
  tts->add_option("--edge", tts_edge, "standard|stabilized edge rule")
      ->check(CLI::IsMember({"standard", "stabilized"}));
  tts->add_option("--t-grid", tts_t_grid, "auto, comma list, or lo:hi:count");
  tts->add_option("--dt", tts_dt, "integration step (0 = calibrate)");
  tts->add_option("--seed", tts_seed, "ensemble seed");
  tts->add_option("--bootstrap", tts_bootstrap, "bootstrap samples");
  tts->add_option("--out-dir", tts_out_dir, "output directory");
  tts->add_option("--workers", tts_workers, "parallel workers");
  ConfigOverlay tts_cfg(tts);

  // bench-int
  auto* bench = app.add_subcommand("bench-int", "Integrator accuracy/cost benchmark");
  std::string bi_dt_grid = "0.25:4:5";
  int bi_n = 64;
  double bi_t_final = 4096.0;
  int bi_instances = 10;
  std::string bi_methods = "cm2,cm4,cm6,cm8,rk5,rk8";
  std::uint64_t bi_seed = 1;
  std::string bi_out_dir = "bench_out";
  int bi_workers = env_workers();
  bench->add_option("--dt-grid", bi_dt_grid, "comma list or lo:hi:count");
  bench->add_option("--n", bi_n, "logical spins");
  bench->add_option("--t-final", bi_t_final, "anneal time");
  bench->add_option("--instances", bi_instances, "ensemble size");
  bench->add_option("--methods", bi_methods, "comma list of integrators");
  bench->add_option("--seed", bi_seed, "ensemble seed");
  bench->add_option("--out-dir", bi_out_dir, "output directory");
  bench->add_option("--workers", bi_workers, "parallel workers");
  ConfigOverlay bi_cfg(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 64;
  }

  try {
    if (*gen) {
      gen_cfg.load();
      gen_cfg.apply("--n", gen_n);
      gen_cfg.apply("--disorder", gen_disorder);
      gen_cfg.apply("--seed", gen_seed);
      gen_cfg.apply("--embedding", gen_embedding);
      gen_cfg.apply("--m", gen_m);
      gen_cfg.apply("--edge", gen_edge);
      gen_cfg.apply("--k", gen_k);
      kinkflow::StudyConfig sc;
      sc.disorder = kinkflow::disorder_kind_from_string(gen_disorder);
      sc.embedding = kinkflow::embedding_kind_from_string(gen_embedding);
      sc.block_size = gen_m;
      sc.edge = kinkflow::edge_exponent_from_string(gen_edge);
      sc.canonical_k = gen_k;
      const auto inst = kinkflow::make_study_instance(sc, gen_n, gen_seed);
      kinkflow::save_instance(inst, gen_out);
      std::cout << "wrote " << gen_out << " (" << inst.total_spins()
                << " spins, seed " << inst.seed << ")\n";
    } else if (*gap) {
      gap_cfg.load();
      gap_cfg.apply("--per-size", gap_per_size);
      gap_cfg.apply("--disorder", gap_disorder);
      gap_cfg.apply("--embedding", gap_embedding);
      gap_cfg.apply("--m", gap_m);
      gap_cfg.apply("--edge", gap_edge);
      gap_cfg.apply("--seed", gap_seed);
      gap_cfg.apply("--bootstrap", gap_bootstrap);
      gap_cfg.apply("--workers", gap_workers);
      if (!gap_instance.empty()) {
        const auto inst = kinkflow::load_instance(gap_instance);
        const auto mg = kinkflow::minimum_gap(inst);
        kinkflow::GapRecord rec;
        rec.n_logical = inst.n_logical;
        rec.block_size = inst.block_size;
        rec.embedding = inst.embedding_kind;
        rec.seed = inst.seed;
        rec.s_c = mg.s_c;
        rec.gap = mg.gap;
        rec.multimodal = mg.multimodal;
        rec.precision = mg.precision_flag;
        if (gap_out.empty()) {
          kinkflow::write_gap_csv(std::cout, {rec});
        } else {
          write_file(gap_out, [&](std::ostream& os) { kinkflow::write_gap_csv(os, {rec}); });
        }
      } else {
        require(!gap_sizes.empty(), "gap needs --instance or --sizes");
        kinkflow::EnsembleStudy study;
        study.sizes = parse_int_list(gap_sizes);
        study.instances_per_size = gap_per_size;
        study.bootstrap_samples = gap_bootstrap;
        study.seed = gap_seed;
        study.workers = gap_workers;
        kinkflow::StudyConfig sc;
        sc.disorder = kinkflow::disorder_kind_from_string(gap_disorder);
        sc.embedding = kinkflow::embedding_kind_from_string(gap_embedding);
        sc.block_size = gap_m;
        sc.edge = kinkflow::edge_exponent_from_string(gap_edge);
        const auto res = kinkflow::median_gap_study(study, sc);
        OutDir out(gap_out_dir);
        write_file(out.dir / "raw.csv",
                   [&](std::ostream& os) { kinkflow::write_gap_csv(os, res.records); });
        write_file(out.dir / "summary.csv",
                   [&](std::ostream& os) { kinkflow::write_gap_summary_csv(os, res); });
        nlohmann::ordered_json cfg{{"command", "gap"},
                                   {"sizes", study.sizes},
                                   {"per_size", gap_per_size},
                                   {"disorder", gap_disorder},
                                   {"embedding", gap_embedding},
                                   {"m", gap_m},
                                   {"edge", gap_edge},
                                   {"seed", gap_seed},
                                   {"bootstrap", gap_bootstrap}};
        out.manifest(full_argv, cfg, {gap_seed});
        std::cout << "wrote " << (out.dir / "summary.csv").string() << "\n";
      }
    } else if (*evolve) {
      ev_cfg.load();
      ev_cfg.apply("--t-final", ev_t_final);
      ev_cfg.apply("--t-start", ev_t_start);
      ev_cfg.apply("--dt", ev_dt);
      ev_cfg.apply("--method", ev_method);
      ev_cfg.apply("--parallel", ev_parallel);
      const auto inst = kinkflow::load_instance(ev_instance);
      kinkflow::AnnealSchedule sched{ev_t_final};
      kinkflow::IntegratorConfig cfg;
      cfg.method = kinkflow::method_from_string(ev_method);
      cfg.dt = ev_dt;
      cfg.parallel = parse_parallel(ev_parallel);
      const auto evo = kinkflow::integrate(inst, sched, cfg, ev_t_start, ev_t_final);
      if (!ev_dump.empty()) dump_matrix(evo.matrix, ev_dump);
      nlohmann::ordered_json line{{"t_final", ev_t_final},
                                  {"dt", ev_dt},
                                  {"method", kinkflow::to_string(cfg.method)},
                                  {"steps", evo.steps},
                                  {"orthogonality_drift", evo.orthogonality_drift}};
      if (!ev_dump.empty()) line["dump_s"] = ev_dump;
      std::cout << line.dump() << "\n";
    } else if (*p0) {
      p0_cfg.load();
      p0_cfg.apply("--t-final", p0_t_final);
      p0_cfg.apply("--dt", p0_dt);
      p0_cfg.apply("--method", p0_method);
      p0_cfg.apply("--parallel", p0_parallel);
      const auto inst = kinkflow::load_instance(p0_instance);
      kinkflow::AnnealSchedule sched{p0_t_final};
      kinkflow::IntegratorConfig cfg;
      cfg.method = kinkflow::method_from_string(p0_method);
      cfg.dt = p0_dt;
      cfg.parallel = parse_parallel(p0_parallel);
      const auto evo = kinkflow::integrate(inst, sched, cfg);
      const auto pr = kinkflow::ground_state_probability(evo.matrix);
      nlohmann::ordered_json line{{"p0", pr.p0},
                                  {"orthogonality_drift", evo.orthogonality_drift}};
      std::cout << line.dump() << "\n";
    } else if (*tts) {
      tts_cfg.load();
      tts_cfg.apply("--sizes", tts_sizes);
      tts_cfg.apply("--per-size", tts_per_size);
      tts_cfg.apply("--disorder", tts_disorder);
      tts_cfg.apply("--embedding", tts_embedding);
      tts_cfg.apply("--m", tts_m);
      tts_cfg.apply("--edge", tts_edge);
      tts_cfg.apply("--t-grid", tts_t_grid);
      tts_cfg.apply("--dt", tts_dt);
      tts_cfg.apply("--seed", tts_seed);
      tts_cfg.apply("--bootstrap", tts_bootstrap);
      tts_cfg.apply("--workers", tts_workers);
      kinkflow::EnsembleStudy study;
      study.sizes = parse_int_list(tts_sizes);
      study.instances_per_size = tts_per_size;
      if (tts_t_grid != "auto") study.t_grid = parse_grid(tts_t_grid);
      study.bootstrap_samples = tts_bootstrap;
      study.seed = tts_seed;
      study.workers = tts_workers;
      study.dt = tts_dt;
      kinkflow::StudyConfig sc;
      sc.disorder = kinkflow::disorder_kind_from_string(tts_disorder);
      sc.embedding = kinkflow::embedding_kind_from_string(tts_embedding);
      sc.block_size = tts_m;
      sc.edge = kinkflow::edge_exponent_from_string(tts_edge);
      const auto res = kinkflow::median_tts_study(study, sc);
      OutDir out(tts_out_dir);
      write_file(out.dir / "raw.csv",
                 [&](std::ostream& os) { kinkflow::write_tts_raw_csv(os, res.records); });
      write_file(out.dir / "summary.csv",
                 [&](std::ostream& os) { kinkflow::write_tts_summary_csv(os, res); });
      write_file(out.dir / "plot.csv",
                 [&](std::ostream& os) { kinkflow::write_tts_plot_csv(os, res); });
      nlohmann::ordered_json cfg{{"command", "tts"},
                                 {"sizes", study.sizes},
                                 {"per_size", tts_per_size},
                                 {"disorder", tts_disorder},
                                 {"embedding", tts_embedding},
                                 {"m", tts_m},
                                 {"edge", tts_edge},
                                 {"t_grid", tts_t_grid},
                                 {"dt", tts_dt},
                                 {"seed", tts_seed},
                                 {"bootstrap", tts_bootstrap}};
      out.manifest(full_argv, cfg, {tts_seed});
      std::cout << "wrote " << (out.dir / "summary.csv").string() << "\n";
    } else if (*bench) {
      bi_cfg.load();
      bi_cfg.apply("--dt-grid", bi_dt_grid);
      bi_cfg.apply("--n", bi_n);
      bi_cfg.apply("--t-final", bi_t_final);
      bi_cfg.apply("--instances", bi_instances);
      bi_cfg.apply("--methods", bi_methods);
      bi_cfg.apply("--seed", bi_seed);
      bi_cfg.apply("--workers", bi_workers);
      kinkflow::IntegratorBenchConfig cfg;
      cfg.dt_grid = parse_grid(bi_dt_grid);
      cfg.n = bi_n;
      cfg.t_final = bi_t_final;
      cfg.instances = bi_instances;
      cfg.methods.clear();
      {
        std::stringstream ss(bi_methods);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          if (!tok.empty()) cfg.methods.push_back(kinkflow::method_from_string(tok));
        }
      }
      cfg.seed = bi_seed;
      cfg.workers = bi_workers;
      const auto res = kinkflow::integrator_benchmark(cfg);
      OutDir out(bi_out_dir);
      write_file(out.dir / "bench_int.csv",
                 [&](std::ostream& os) { kinkflow::write_integrator_csv(os, res); });
      nlohmann::ordered_json jcfg{{"command", "bench-int"},
                                  {"dt_grid", cfg.dt_grid},
                                  {"n", bi_n},
                                  {"t_final", bi_t_final},
                                  {"instances", bi_instances},
                                  {"methods", bi_methods},
                                  {"seed", bi_seed}};
      out.manifest(full_argv, jcfg, {bi_seed});
      kinkflow::write_integrator_csv(std::cout, res);
    }
  } catch (const kinkflow::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
