#include "kinkflow/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <lapacke.h>

#include "kinkflow/errors.hpp"

namespace kinkflow {

namespace {

// Smallest energy below this fraction of the generator magnitude is flagged:
// it sits beyond what absolute-accuracy cross-checks can resolve, even though
// the bidiagonal solver keeps relative accuracy.
constexpr double kPrecisionRel = 1e-14;

}  // namespace

void BandedSkewGenerator::validate() const {
  require(dim >= 2 && dim % 2 == 0, "generator dimension must be even and >= 2");
  require(static_cast<int>(superdiag.size()) == dim - 1,
          "superdiagonal length must be dim - 1");
  require(std::isfinite(scale), "generator scale must be finite");
}

BandedSkewGenerator build_generator(const ChainInstance& inst, double s) {
  inst.validate();
  require(s >= 0.0 && s <= 1.0, "schedule point s must lie in [0, 1]");
  const int n = inst.total_spins();
  BandedSkewGenerator gen;
  gen.dim = 2 * n;
  gen.scale = 2.0;
  gen.superdiag.assign(gen.dim - 1, 0.0);
  for (int i = 0; i < n; ++i) gen.superdiag[2 * i] = 1.0 - s;
  for (int k = 0; k + 1 < n; ++k) gen.superdiag[2 * k + 1] = s * inst.couplings[k];
  return gen;
}

double generator_norm(const BandedSkewGenerator& gen) {
  double m = 0.0;
  for (double v : gen.superdiag) m = std::max(m, std::abs(v));
  return std::abs(gen.scale) * m;
}

SpectrumResult single_particle_energies(const BandedSkewGenerator& gen) {
  gen.validate();
  const int n = gen.dim / 2;
  // Even/odd permutation turns the tridiagonal skew matrix into
  // [[0, C], [-C^T, 0]] with C lower bidiagonal: C(i,i) = superdiag[2i],
  // C(i,i-1) = -superdiag[2i-1]. Energies are the singular values of C.
  std::vector<double> diag(n), off(std::max(0, n - 1));
  for (int i = 0; i < n; ++i) diag[i] = std::abs(gen.superdiag[2 * i]);
  for (int i = 0; i + 1 < n; ++i) off[i] = std::abs(gen.superdiag[2 * i + 1]);

  // Singular values only: dbdsqr takes the dqds branch, which preserves the
  // relative accuracy of exponentially small values.
  const lapack_int info = LAPACKE_dbdsqr(LAPACK_COL_MAJOR, 'U', n, 0, 0, 0,
                                         diag.data(), off.data(), nullptr, 1,
                                         nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericError("bidiagonal SVD failed to converge");

  SpectrumResult result;
  const double factor = std::abs(gen.scale) / 2.0;
  result.energies.assign(diag.rbegin(), diag.rend());  // ascending
  for (double& e : result.energies) e *= factor;
  require(result.energies.size() >= 2, "need at least two energies for a gap");
  result.gap = 2.0 * (result.energies[0] + result.energies[1]);
  result.precision_flag =
      result.energies[0] < kPrecisionRel * generator_norm(gen);
  return result;
}

SpectrumResult spectrum_at(const ChainInstance& inst, double s) {
  SpectrumResult r = single_particle_energies(build_generator(inst, s));
  r.s = s;
  return r;
}

std::vector<double> many_body_spectrum(const std::vector<double>& energies) {
  const int n = static_cast<int>(energies.size());
  require(n >= 1 && n <= 20, "many-body enumeration limited to 20 modes");
  double e0 = 0.0;
  for (double e : energies) {
    require(e >= 0.0, "single-particle energies must be non-negative");
    e0 -= e;
  }
  std::vector<double> levels;
  levels.reserve(std::size_t{1} << n);
  levels.push_back(e0);
  for (int k = 0; k < n; ++k) {
    const std::size_t half = levels.size();
    for (std::size_t idx = 0; idx < half; ++idx)
      levels.push_back(levels[idx] + 2.0 * energies[k]);
  }
  std::sort(levels.begin(), levels.end());
  return levels;
}

namespace {

struct GapEval {
  double gap;
  bool precision;
};

GapEval eval_gap(const ChainInstance& inst, double s) {
  const SpectrumResult r = single_particle_energies(build_generator(inst, s));
  return {r.gap, r.precision_flag};
}

}  // namespace

std::vector<std::pair<double, double>> gap_curve(const ChainInstance& inst,
                                                 double s_min, double s_max,
                                                 int points) {
  require(points >= 2, "gap curve needs at least two points");
  require(s_min > 0.0 && s_max < 1.0 && s_min < s_max,
          "gap curve window must satisfy 0 < s_min < s_max < 1");
  std::vector<std::pair<double, double>> curve(points);
  for (int i = 0; i < points; ++i) {
    const double s = s_min + (s_max - s_min) * i / (points - 1);
    curve[i] = {s, eval_gap(inst, s).gap};
  }
  return curve;
}

MinimumGapResult minimum_gap(const ChainInstance& inst,
                             const MinimumGapOptions& opts) {
  require(opts.grid_points >= 8, "minimum gap scan needs at least 8 grid points");
  require(opts.s_min > 0.0 && opts.s_max < 1.0 && opts.s_min < opts.s_max,
          "scan window must satisfy 0 < s_min < s_max < 1");
  require(opts.s_tol > 0.0, "s tolerance must be positive");

  const int g = opts.grid_points;
  std::vector<double> ss(g), gaps(g);
  for (int i = 0; i < g; ++i) {
    ss[i] = opts.s_min + (opts.s_max - opts.s_min) * i / (g - 1);
    gaps[i] = eval_gap(inst, ss[i]).gap;
  }
  int best = 0;
  for (int i = 1; i < g; ++i)
    if (gaps[i] < gaps[best]) best = i;

  // Count distinct grid-scale local minima competitive with the global one.
  int competitive = 0;
  for (int i = 0; i < g; ++i) {
    const bool left_ok = i == 0 || gaps[i] <= gaps[i - 1];
    const bool right_ok = i == g - 1 || gaps[i] <= gaps[i + 1];
    const bool strict = (i > 0 && gaps[i] < gaps[i - 1]) ||
                        (i < g - 1 && gaps[i] < gaps[i + 1]);
    if (left_ok && right_ok && strict &&
        gaps[i] <= gaps[best] * (1.0 + opts.multimodal_margin))
      ++competitive;
  }

  // Golden-section refinement inside the best grid bracket.
  double lo = ss[std::max(0, best - 1)];
  double hi = ss[std::min(g - 1, best + 1)];
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = eval_gap(inst, x1).gap;
  double f2 = eval_gap(inst, x2).gap;
  while (hi - lo > opts.s_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = eval_gap(inst, x1).gap;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = eval_gap(inst, x2).gap;
    }
  }

  MinimumGapResult result;
  const double s_ref = f1 <= f2 ? x1 : x2;
  const double g_ref = std::min(f1, f2);
  if (g_ref <= gaps[best]) {
    result.s_c = s_ref;
    result.gap = g_ref;
  } else {
    result.s_c = ss[best];
    result.gap = gaps[best];
  }
  result.multimodal = competitive >= 2;
  result.precision_flag = eval_gap(inst, result.s_c).precision;
  return result;
}

}  // namespace kinkflow
