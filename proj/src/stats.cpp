#include "kinkflow/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinkflow/errors.hpp"
#include "kinkflow/rng.hpp"

namespace kinkflow {

double median_of(std::vector<double> values) {
  require(!values.empty(), "median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double percentile_sorted(const std::vector<double>& sorted, double q) {
  require(!sorted.empty(), "percentile of empty sample");
  require(q >= 0.0 && q <= 1.0, "percentile level outside [0, 1]");
  if (sorted.size() == 1) return sorted[0];
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  if (lo == hi) return sorted[lo];
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

BootstrapCI bootstrap_median_ci(const std::vector<double>& values, int samples,
                                double level, std::uint64_t seed) {
  require(!values.empty(), "bootstrap of empty sample");
  require(samples > 0, "bootstrap sample count must be positive");
  require(level > 0.0 && level < 1.0, "bootstrap level must lie in (0, 1)");
  std::vector<double> base(values);
  std::sort(base.begin(), base.end());
  const std::size_t n = base.size();
  Rng rng(seed, 0x626f6f74);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(samples));
  std::vector<double> draw(n);
  for (int b = 0; b < samples; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      draw[i] = base[rng.next_u64() % n];
    }
    stats.push_back(median_of(draw));
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = 0.5 * (1.0 - level);
  return {percentile_sorted(stats, alpha), percentile_sorted(stats, 1.0 - alpha)};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "linear fit needs matching lengths");
  require(x.size() >= 2, "linear fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, "linear fit needs non-degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace kinkflow
