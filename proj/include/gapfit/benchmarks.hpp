#pragma once

// Comparison predictors for the increment into the last day T. Each takes
// the full series and uses days 1..T-1 only. Missing reports are imputed by
// last observation carried forward; leading missing days are backfilled
// from the first report.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapfit/series.hpp"

namespace gapfit {

enum class BenchmarkKind { zero, mean, modified_mean, linreg_locf };

std::string to_string(BenchmarkKind kind);
// Accepts zero, mean, modified_mean, linreg_locf. Throws UsageError.
BenchmarkKind parse_benchmark(const std::string& text);

// Throws InsufficientDataError when nothing is reported.
std::vector<double> locf_impute(std::span<const std::optional<double>> cases);

double predict_zero(const HospitalSeries& series);

// Mean of the T-2 imputed increments on days 2..T-1.
// Throws InsufficientDataError for T < 3 or no report before day T.
double predict_mean(const HospitalSeries& series);

// 0 when the imputed increment into day T-1 is 0, else predict_mean.
double predict_modified_mean(const HospitalSeries& series);

struct OlsFit {
  Beta beta{};
  std::size_t rank = 0;
  // Set when the design is rank deficient; beta is then the minimum-norm
  // least-squares solution.
  bool rank_deficient = false;
};

// Ordinary least squares of the imputed increments on (1, y_locf[t], z[t])
// over every day of the given series. Throws InsufficientDataError for
// fewer than 4 days or no report.
OlsFit fit_linreg_locf(const HospitalSeries& series);

// Mean squared residual of the imputed increments under beta; the
// objective fit_linreg_locf minimizes.
double linreg_objective(const HospitalSeries& series, const Beta& beta);

}  // namespace gapfit
