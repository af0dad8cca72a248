#include "gapfit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gapfit/errors.hpp"

namespace gapfit {

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw UsageError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile level outside [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double position = p * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(position));
  const std::size_t upper = std::min(lower + 1, sorted.size() - 1);
  const double frac = position - static_cast<double>(lower);
  if (frac == 0.0) return sorted[lower];
  return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.sum += v;
  s.mean = s.sum / static_cast<double>(values.size());
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  return s;
}

}  // namespace gapfit
