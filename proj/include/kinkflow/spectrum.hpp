#pragma once

#include <vector>

#include "kinkflow/instance.hpp"

namespace kinkflow {

// Skew-symmetric tridiagonal single-particle generator, stored by its
// superdiagonal: full matrix G = scale * W with W(k, k+1) = superdiag[k],
// W(k+1, k) = -superdiag[k]. Even superdiagonal slots carry the transverse
// field, odd slots carry bond couplings. The factor 2 of the equation of
// motion dS/dt = 2 W S lives in scale, as does the total time when the
// integrator works in normalized time.
struct BandedSkewGenerator {
  int dim = 0;                    // 2 * total_spins
  std::vector<double> superdiag;  // length dim - 1
  double scale = 2.0;

  void validate() const;
};

// Generator of H(s) = (1-s) H_driver + s H_problem for the given chain.
BandedSkewGenerator build_generator(const ChainInstance& inst, double s);

// Largest |entry| of scale * W; reference magnitude for precision flags.
double generator_norm(const BandedSkewGenerator& gen);

struct SpectrumResult {
  double s = 0.0;
  std::vector<double> energies;  // ascending, length total_spins
  double gap = 0.0;              // 2 * (energies[0] + energies[1])
  bool precision_flag = false;   // smallest energy below relative resolution
};

// Single-particle energies eps_k >= 0 of (scale/2) * W, computed as singular
// values of the even/odd bidiagonal block. The bidiagonal path keeps high
// relative accuracy for energies that are exponentially small in the chain
// length, which a dense symmetric solver cannot resolve.
SpectrumResult single_particle_energies(const BandedSkewGenerator& gen);
SpectrumResult spectrum_at(const ChainInstance& inst, double s);

// All 2^n many-body levels E = E0 + 2 * sum(n_k eps_k), E0 = -sum(eps_k),
// sorted ascending. Guarded to n <= 20 levels of growth.
std::vector<double> many_body_spectrum(const std::vector<double>& energies);

struct MinimumGapOptions {
  double s_min = 0.05;
  double s_max = 0.98;
  int grid_points = 256;
  double s_tol = 1e-8;
  // Local minima within this relative margin of the global one raise the
  // multimodal flag.
  double multimodal_margin = 0.05;
};

struct MinimumGapResult {
  double s_c = 0.0;
  double gap = 0.0;
  bool multimodal = false;
  bool precision_flag = false;
};

// Coarse grid scan followed by golden-section refinement of the best bracket.
MinimumGapResult minimum_gap(const ChainInstance& inst,
                             const MinimumGapOptions& opts = {});

// Gap curve on a uniform grid, for diagnostics and plot data.
std::vector<std::pair<double, double>> gap_curve(const ChainInstance& inst,
                                                 double s_min, double s_max,
                                                 int points);

}  // namespace kinkflow
