#pragma once

#include <span>

namespace gapfit {

// Quantile with linear interpolation between order statistics
// (position p * (n - 1) in the sorted sample). Throws UsageError on an
// empty sample or p outside [0, 1].
double quantile(std::span<const double> values, double p);

struct Summary {
  double sum = 0.0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t count = 0;
};

// All fields are 0 for an empty sample.
Summary summarize(std::span<const double> values);

}  // namespace gapfit
