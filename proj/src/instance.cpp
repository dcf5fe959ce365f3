#include "kinkflow/instance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "kinkflow/errors.hpp"
#include "kinkflow/rng.hpp"

namespace kinkflow {

const char* to_string(DisorderKind k) {
  switch (k) {
    case DisorderKind::uniform_strong: return "uniform_strong";
    case DisorderKind::uniform_scaled: return "uniform_scaled";
  }
  return "?";
}

const char* to_string(EmbeddingKind k) {
  switch (k) {
    case EmbeddingKind::none: return "none";
    case EmbeddingKind::canonical: return "canonical";
    case EmbeddingKind::balanced: return "balanced";
  }
  return "?";
}

const char* to_string(EdgeExponent e) {
  return e == EdgeExponent::standard ? "standard" : "stabilized";
}

DisorderKind disorder_kind_from_string(const std::string& s) {
  if (s == "uniform_strong" || s == "strong") return DisorderKind::uniform_strong;
  if (s == "uniform_scaled" || s == "scaled") return DisorderKind::uniform_scaled;
  throw ValidationError("unknown disorder kind: " + s);
}

EmbeddingKind embedding_kind_from_string(const std::string& s) {
  if (s == "none") return EmbeddingKind::none;
  if (s == "canonical") return EmbeddingKind::canonical;
  if (s == "balanced") return EmbeddingKind::balanced;
  throw ValidationError("unknown embedding kind: " + s);
}

EdgeExponent edge_exponent_from_string(const std::string& s) {
  if (s == "standard") return EdgeExponent::standard;
  if (s == "stabilized") return EdgeExponent::stabilized;
  throw ValidationError("unknown edge exponent rule: " + s);
}

DisorderSpec DisorderSpec::strong(std::uint64_t seed) {
  return DisorderSpec{DisorderKind::uniform_strong, 0.0, 1.0, seed};
}

DisorderSpec DisorderSpec::scaled(int m, std::uint64_t seed) {
  require(m >= 2, "scaled disorder requires block size m >= 2");
  return DisorderSpec{DisorderKind::uniform_scaled, 1.0 / m, 1.0, seed};
}

void DisorderSpec::validate() const {
  require(std::isfinite(j_min) && std::isfinite(j_max),
          "disorder bounds must be finite");
  require(j_min >= 0.0, "j_min must be non-negative");
  require(j_min < j_max, "j_min must be below j_max");
}

void AnnealSchedule::validate() const {
  require(std::isfinite(total_time) && total_time > 0.0,
          "total_time must be positive");
}

double gamma_of_s(double s) {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  return (1.0 - s) / s;
}

double s_of_gamma(double gamma) {
  require(gamma > 0.0, "gamma must be positive");
  return 1.0 / (1.0 + gamma);
}

double rescale_lambda(int m) {
  require(m >= 2, "rescale_lambda requires m >= 2");
  return std::pow(m, -1.0 / (m - 1));
}

double balanced_c(int m) {
  require(m >= 2, "balanced_c requires m >= 2");
  const double mm1 = static_cast<double>(m) - 1.0;
  return std::pow(m, -static_cast<double>(m) / (mm1 * mm1));
}

std::vector<double> compose_couplings(const std::vector<double>& logical,
                                      const std::vector<double>& blocks, int m) {
  const auto n = static_cast<int>(logical.size()) + 1;
  if (m == 1) return logical;
  require(static_cast<int>(blocks.size()) == n,
          "need one block coupling per logical spin");
  std::vector<double> out(static_cast<std::size_t>(n) * m - 1);
  for (int i = 0; i < n; ++i) {
    for (int b = 0; b < m - 1; ++b) out[static_cast<std::size_t>(i) * m + b] = blocks[i];
    if (i + 1 < n) out[static_cast<std::size_t>(i + 1) * m - 1] = logical[i];
  }
  return out;
}

void ChainInstance::validate() const {
  require(n_logical >= 2, "chain needs at least two logical spins");
  require(block_size >= 1, "block size must be at least one");
  require(static_cast<int>(logical_couplings.size()) == n_logical - 1,
          "logical coupling count must be n_logical - 1");
  if (block_size == 1) {
    require(embedding_kind == EmbeddingKind::none,
            "block size 1 must not carry an embedding kind");
    require(block_couplings.empty(), "logical chain must not carry block couplings");
  } else {
    require(embedding_kind != EmbeddingKind::none,
            "embedded chain must carry an embedding kind");
    require(static_cast<int>(block_couplings.size()) == n_logical,
            "block coupling count must be n_logical");
  }
  require(static_cast<int>(couplings.size()) == total_spins() - 1,
          "physical coupling count must be total_spins - 1");
  for (double j : couplings)
    require(std::isfinite(j) && j > 0.0, "all couplings must be strictly positive");
  const auto recomposed = compose_couplings(logical_couplings, block_couplings, block_size);
  require(recomposed == couplings, "physical couplings must match the block layout");
  if (block_size > 1) {
    const double min_k = *std::min_element(block_couplings.begin(), block_couplings.end());
    const double max_j =
        *std::max_element(logical_couplings.begin(), logical_couplings.end());
    if (min_k <= max_j) {
      std::ostringstream msg;
      msg << "intra-block couplings must dominate logical ones: min K = " << min_k
          << " <= max J = " << max_j;
      throw ValidationError(msg.str());
    }
  }
}

ChainInstance sample_logical(int n, const DisorderSpec& spec) {
  require(n >= 2, "chain needs at least two logical spins");
  spec.validate();
  Rng rng(spec.seed);
  ChainInstance inst;
  inst.n_logical = n;
  inst.block_size = 1;
  inst.embedding_kind = EmbeddingKind::none;
  inst.seed = spec.seed;
  inst.logical_couplings.resize(n - 1);
  for (double& j : inst.logical_couplings) {
    // 1 - u maps [0,1) onto (0,1], keeping couplings strictly positive.
    const double u = 1.0 - rng.next_double();
    j = spec.j_min + (spec.j_max - spec.j_min) * u;
  }
  inst.couplings = inst.logical_couplings;
  inst.validate();
  return inst;
}

namespace {

ChainInstance assemble_embedded(const ChainInstance& logical, int m,
                                EmbeddingKind kind, std::vector<double> blocks) {
  ChainInstance emb;
  emb.n_logical = logical.n_logical;
  emb.block_size = m;
  emb.embedding_kind = kind;
  emb.seed = logical.seed;
  emb.rescale_factor = logical.rescale_factor;
  emb.logical_couplings = logical.logical_couplings;
  emb.block_couplings = std::move(blocks);
  emb.couplings = compose_couplings(emb.logical_couplings, emb.block_couplings, m);
  emb.validate();
  return emb;
}

}  // namespace

ChainInstance embed_canonical(const ChainInstance& logical, int m, double k) {
  logical.validate();
  require(logical.block_size == 1, "embedding applies to logical chains only");
  require(m >= 2, "embedding requires block size m >= 2");
  require(std::isfinite(k) && k > 0.0, "intra-block coupling must be positive");
  return assemble_embedded(logical, m, EmbeddingKind::canonical,
                           std::vector<double>(logical.n_logical, k));
}

ChainInstance embed_balanced(const ChainInstance& logical_in, int m,
                             const BalancedOptions& opts) {
  logical_in.validate();
  require(logical_in.block_size == 1, "embedding applies to logical chains only");
  require(m >= 2, "embedding requires block size m >= 2");
  ChainInstance logical = logical_in;
  if (opts.apply_rescale) logical = rescale(logical, rescale_lambda(m));
  const double c = opts.c > 0.0 ? opts.c : balanced_c(m);
  require(std::isfinite(c) && c > 0.0, "balanced constant must be positive");

  const auto& j = logical.logical_couplings;
  const int n = logical.n_logical;
  const double bulk_exp = -1.0 / (2.0 * (m - 1));
  const double edge_exp = opts.edge == EdgeExponent::standard
                              ? -1.0 / (m + 1)
                              : -1.0 / (m - 1);
  std::vector<double> k(n);
  k[0] = c * std::pow(j.front(), edge_exp);
  k[n - 1] = c * std::pow(j.back(), edge_exp);
  for (int i = 1; i + 1 < n; ++i) k[i] = c * std::pow(j[i - 1] * j[i], bulk_exp);
  return assemble_embedded(logical, m, EmbeddingKind::balanced, std::move(k));
}

ChainInstance rescale(const ChainInstance& inst, double lambda) {
  require(std::isfinite(lambda) && lambda > 0.0, "rescale factor must be positive");
  ChainInstance out = inst;
  for (double& x : out.logical_couplings) x *= lambda;
  for (double& x : out.block_couplings) x *= lambda;
  for (double& x : out.couplings) x *= lambda;
  out.rescale_factor = inst.rescale_factor * lambda;
  out.validate();
  return out;
}

std::vector<double> renormalized_fields(const ChainInstance& emb, double gamma_bare) {
  emb.validate();
  require(std::isfinite(gamma_bare) && gamma_bare > 0.0,
          "gamma_bare must be positive");
  const int m = emb.block_size;
  if (m == 1) return std::vector<double>(emb.n_logical, gamma_bare);
  const double min_k =
      *std::min_element(emb.block_couplings.begin(), emb.block_couplings.end());
  if (gamma_bare >= min_k) {
    std::ostringstream msg;
    msg << "block coarse-graining needs gamma_bare < min K (" << gamma_bare
        << " >= " << min_k << ")";
    throw ValidationError(msg.str());
  }
  std::vector<double> fields(emb.n_logical);
  for (int i = 0; i < emb.n_logical; ++i)
    fields[i] = std::pow(gamma_bare, m) / std::pow(emb.block_couplings[i], m - 1);
  return fields;
}

namespace {

constexpr int kFormatVersion = 1;

}  // namespace

std::string to_json(const ChainInstance& inst) {
  inst.validate();
  nlohmann::ordered_json j;
  j["format_version"] = kFormatVersion;
  j["n_logical"] = inst.n_logical;
  j["block_size"] = inst.block_size;
  j["embedding_kind"] = to_string(inst.embedding_kind);
  j["seed"] = inst.seed;
  j["rescale_factor"] = inst.rescale_factor;
  j["logical_couplings"] = inst.logical_couplings;
  j["block_couplings"] = inst.block_couplings;
  j["couplings"] = inst.couplings;
  return j.dump(2);
}

ChainInstance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("instance JSON parse failure: ") + e.what());
  }
  try {
    require(j.at("format_version").get<int>() == kFormatVersion,
            "unsupported instance format version");
    ChainInstance inst;
    inst.n_logical = j.at("n_logical").get<int>();
    inst.block_size = j.at("block_size").get<int>();
    inst.embedding_kind =
        embedding_kind_from_string(j.at("embedding_kind").get<std::string>());
    inst.seed = j.at("seed").get<std::uint64_t>();
    inst.rescale_factor = j.at("rescale_factor").get<double>();
    inst.logical_couplings = j.at("logical_couplings").get<std::vector<double>>();
    inst.block_couplings = j.at("block_couplings").get<std::vector<double>>();
    inst.couplings = j.at("couplings").get<std::vector<double>>();
    inst.validate();
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("instance JSON field failure: ") + e.what());
  }
}

void save_instance(const ChainInstance& inst, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), "cannot open for writing: " + path);
  out << to_json(inst) << "\n";
  require(out.good(), "write failure: " + path);
}

ChainInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

}  // namespace kinkflow
