#pragma once

#include <cstdint>
#include <vector>

namespace kinkflow {

// Median of a copy of the values; even counts average the two middle entries.
// Sorting first makes every aggregate invariant under input permutation.
double median_of(std::vector<double> values);

// Quantile with linear interpolation between order statistics, q in [0, 1].
double percentile_sorted(const std::vector<double>& sorted, double q);

struct BootstrapCI {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap for the median: resamples with replacement, seeded and
// independent of input order (values are sorted internally).
BootstrapCI bootstrap_median_ci(const std::vector<double>& values, int samples,
                                double level, std::uint64_t seed);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace kinkflow
