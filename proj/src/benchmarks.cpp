#include "gapfit/benchmarks.hpp"

#include <Eigen/Dense>

#include "gapfit/errors.hpp"

namespace gapfit {

std::string to_string(BenchmarkKind kind) {
  switch (kind) {
    case BenchmarkKind::zero: return "zero";
    case BenchmarkKind::mean: return "mean";
    case BenchmarkKind::modified_mean: return "modified_mean";
    case BenchmarkKind::linreg_locf: return "linreg_locf";
  }
  return "unknown";
}

BenchmarkKind parse_benchmark(const std::string& text) {
  if (text == "zero") return BenchmarkKind::zero;
  if (text == "mean") return BenchmarkKind::mean;
  if (text == "modified_mean") return BenchmarkKind::modified_mean;
  if (text == "linreg_locf") return BenchmarkKind::linreg_locf;
  throw UsageError("unknown benchmark '" + text + "'");
}

std::vector<double> locf_impute(std::span<const std::optional<double>> cases) {
  std::optional<double> first;
  for (const auto& y : cases) {
    if (y) {
      first = y;
      break;
    }
  }
  if (!first) throw InsufficientDataError("LOCF imputation needs at least one report");
  std::vector<double> out(cases.size());
  double last = *first;
  for (std::size_t t = 0; t < cases.size(); ++t) {
    if (cases[t]) last = *cases[t];
    out[t] = last;
  }
  return out;
}

namespace {

// Imputed days 1..T-1.
std::vector<double> imputed_history(const HospitalSeries& series) {
  if (series.days() < 3) {
    throw InsufficientDataError("series " + series.id() + " is too short for the mean model");
  }
  const auto& y = series.cases();
  return locf_impute(std::span(y.data(), y.size() - 1));
}

}  // namespace

double predict_zero(const HospitalSeries&) { return 0.0; }

double predict_mean(const HospitalSeries& series) {
  const std::vector<double> y = imputed_history(series);
  double total = 0.0;
  for (std::size_t t = 1; t < y.size(); ++t) total += y[t] - y[t - 1];
  return total / static_cast<double>(y.size() - 1);
}

double predict_modified_mean(const HospitalSeries& series) {
  const std::vector<double> y = imputed_history(series);
  const std::size_t n = y.size();
  if (y[n - 1] - y[n - 2] == 0.0) return 0.0;
  return predict_mean(series);
}

OlsFit fit_linreg_locf(const HospitalSeries& series) {
  if (series.days() < 4) {
    throw InsufficientDataError("series " + series.id() + " is too short for linear regression");
  }
  const std::vector<double> y = locf_impute(series.cases());
  const auto z = series.incidence();
  const auto rows = static_cast<Eigen::Index>(y.size() - 1);
  Eigen::MatrixXd design(rows, 3);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto t = static_cast<std::size_t>(i);
    design(i, 0) = 1.0;
    design(i, 1) = y[t];
    design(i, 2) = z[t];
    target(i) = y[t + 1] - y[t];
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
  const Eigen::VectorXd solution = cod.solve(target);
  OlsFit out;
  out.beta = {solution(0), solution(1), solution(2)};
  out.rank = static_cast<std::size_t>(cod.rank());
  out.rank_deficient = out.rank < 3;
  return out;
}

double linreg_objective(const HospitalSeries& series, const Beta& beta) {
  const std::vector<double> y = locf_impute(series.cases());
  const auto z = series.incidence();
  double total = 0.0;
  for (std::size_t t = 0; t + 1 < y.size(); ++t) {
    const double residual = (y[t + 1] - y[t]) - (beta.b1 + beta.b2 * y[t] + beta.b3 * z[t]);
    total += residual * residual;
  }
  return total / static_cast<double>(y.size() - 1);
}

}  // namespace gapfit
