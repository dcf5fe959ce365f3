#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kinkflow {

enum class DisorderKind { uniform_strong, uniform_scaled };
enum class EmbeddingKind { none, canonical, balanced };

// Exponent rule for the intra-block couplings of the first and last block,
// which touch a single logical coupling instead of two.
//   standard:   K = c * J^(-1/(m+1))
//   stabilized: K = c * J^(-1/(m-1))
// With scaled disorder only the stabilized rule keeps min K > max J for every
// realization; the standard rule violates that separation with probability
// approaching one as the chain grows, in which case embedding fails loudly.
enum class EdgeExponent { standard, stabilized };

const char* to_string(DisorderKind k);
const char* to_string(EmbeddingKind k);
const char* to_string(EdgeExponent e);
DisorderKind disorder_kind_from_string(const std::string& s);
EmbeddingKind embedding_kind_from_string(const std::string& s);
EdgeExponent edge_exponent_from_string(const std::string& s);

// Distribution of logical couplings. Couplings are drawn uniformly from
// (j_min, j_max]; the half-open interval keeps every coupling strictly
// positive so log-coordinates stay finite.
struct DisorderSpec {
  DisorderKind kind = DisorderKind::uniform_strong;
  double j_min = 0.0;
  double j_max = 1.0;
  std::uint64_t seed = 0;

  // U(0, 1] strong disorder.
  static DisorderSpec strong(std::uint64_t seed);
  // U(1/m, 1] scaled disorder whose lower cutoff matches block size m.
  static DisorderSpec scaled(int m, std::uint64_t seed);

  void validate() const;
};

// An open Ising chain. `couplings` holds the physical bond strengths: bond b
// couples spins b and b+1 (0-indexed), length total_spins()-1. For embedded
// chains block i occupies spins [i*m, (i+1)*m); its m-1 internal bonds all
// carry block_couplings[i] and bond m*i-1 carries logical_couplings[i-1].
struct ChainInstance {
  int n_logical = 0;
  int block_size = 1;
  EmbeddingKind embedding_kind = EmbeddingKind::none;
  std::uint64_t seed = 0;
  double rescale_factor = 1.0;
  std::vector<double> logical_couplings;  // length n_logical - 1
  std::vector<double> block_couplings;    // length n_logical, empty if m == 1
  std::vector<double> couplings;          // length total_spins() - 1

  int total_spins() const { return n_logical * block_size; }
  void validate() const;
};

// Interpolation H(s) = (1-s) H_driver + s H_problem run over physical time
// total_time, with s(t) = t / total_time.
struct AnnealSchedule {
  double total_time = 1.0;

  double s_of_t(double t) const { return t / total_time; }
  void validate() const;
};

// Transverse-field strength in units of the couplings at schedule point s.
double gamma_of_s(double s);
double s_of_gamma(double gamma);

// Multiplicative rescaling applied to scaled disorder before embedding so
// that balanced intra-block couplings never exceed one: lambda = m^(-1/(m-1)).
double rescale_lambda(int m);
// Balanced-embedding constant c = m^(-m/(m-1)^2) matching that rescaling.
double balanced_c(int m);

struct BalancedOptions {
  // Rescaling constant; 0 selects balanced_c(m).
  double c = 0.0;
  // Multiply logical couplings by rescale_lambda(m) before embedding.
  bool apply_rescale = true;
  EdgeExponent edge = EdgeExponent::standard;
};

// Draws a logical chain (block_size 1) of n spins.
ChainInstance sample_logical(int n, const DisorderSpec& spec);

// Embeds every logical spin into a block of m spins with one uniform
// intra-block coupling k.
ChainInstance embed_canonical(const ChainInstance& logical, int m, double k = 1.0);

// Embeds with per-block couplings K_i = c * (J_i * J_{i+1})^(-1/(2(m-1)))
// in the bulk and the edge rule from opts. Requires m >= 2 and fails if the
// result violates min K > max J.
ChainInstance embed_balanced(const ChainInstance& logical, int m,
                             const BalancedOptions& opts = {});

// Multiplies all couplings by lambda and records the cumulative factor.
ChainInstance rescale(const ChainInstance& inst, double lambda);

// Per-block effective transverse fields gamma_bare^m / K_i^(m-1).
// Requires gamma_bare < min_i K_i, the validity domain of the block
// coarse-graining step.
std::vector<double> renormalized_fields(const ChainInstance& emb, double gamma_bare);

// Physical bond list assembled from logical and block couplings.
std::vector<double> compose_couplings(const std::vector<double>& logical,
                                      const std::vector<double>& blocks, int m);

// JSON round trip. Doubles survive exactly (shortest round-trip formatting).
std::string to_json(const ChainInstance& inst);
ChainInstance instance_from_json(const std::string& text);
void save_instance(const ChainInstance& inst, const std::string& path);
ChainInstance load_instance(const std::string& path);

}  // namespace kinkflow
