#pragma once

// Gap-bridging increment regression.
//
// The model predicts the next day's change in prevalent cases from the
// current state and the incidence covariate,
//
//   dy_hat[t+1] = b1 + b2 * y_tilde[t] + b3 * z[t],
//
// where y_tilde is the reported value on reported days and is carried
// forward with the model's own prediction across missing days. Leading
// missing days are skipped; the first report anchors the recursion.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gapfit/autodiff.hpp"
#include "gapfit/errors.hpp"
#include "gapfit/series.hpp"

namespace gapfit {

// Masked mean squared error of the predicted increments. Residuals are
// scored only on reported days after the first report, and the sum is
// divided by the number of scored residuals. Works on double or DiffScalar
// coefficients. Throws InsufficientDataError with fewer than 2 reports.
template <class Scalar>
Scalar loss(const HospitalSeries& series, const std::array<Scalar, 3>& beta) {
  const auto& y = series.cases();
  const auto z = series.incidence();
  Scalar squared_error = 0.0;
  Scalar last_y = 0.0;
  bool first_seen = false;
  std::size_t scored = 0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (!first_seen) {
      if (y[t]) {
        first_seen = true;
        last_y = *y[t];
      }
      continue;
    }
    const Scalar predicted = beta[0] + beta[1] * last_y + beta[2] * z[t - 1];
    if (y[t]) {
      squared_error += square((*y[t] - last_y) - predicted);
      ++scored;
      last_y = *y[t];
    } else {
      last_y += predicted;
    }
  }
  if (scored == 0) {
    throw InsufficientDataError("series " + series.id() + " has fewer than 2 reports");
  }
  return squared_error / static_cast<double>(scored);
}

inline double loss(const HospitalSeries& series, const Beta& beta) {
  return loss<double>(series, beta.to_array());
}

// Observed-or-carried state and predicted increments. Both are empty before
// the first report; dy_hat is also empty on the first report day.
struct Trajectory {
  std::vector<std::optional<double>> y_tilde;
  std::vector<std::optional<double>> dy_hat;
};

// Bridges every gap after the first report by the carry-forward
// recursion. Throws InsufficientDataError when nothing is reported.
Trajectory predict_trajectory(const HospitalSeries& series, const Beta& beta);

// Carries the final state of the trajectory forward. future_incidence[k]
// is the covariate of day T+k (0-based k); horizon h needs h - 1 values.
std::vector<double> forecast(const HospitalSeries& series, const Beta& beta,
                             std::span<const double> future_incidence, std::size_t horizon);

// Predicted increment after gap_len carried steps from y_anchor, computed by
// expanding the recursion into explicit monomials of (b1, b2, b3):
//
//   y_tilde[k] = sum_i C(k,i) b2^i y_anchor
//              + sum_{j<k} sum_i C(k-1-j,i) b2^i (b1 + b3 z[j])
//   result     = b1 + b2 y_tilde[gap_len] + b3 z[gap_len]
//
// z_window holds the covariate from the anchor day onward and must have
// gap_len + 1 entries.
template <class Scalar>
Scalar expand_gap(double y_anchor, std::span<const double> z_window,
                  const std::array<Scalar, 3>& beta, std::size_t gap_len) {
  if (z_window.size() != gap_len + 1) {
    throw UsageError("expand_gap: covariate window must have gap_len + 1 entries");
  }
  auto binomial_row = [](std::size_t k) {
    std::vector<double> row(k + 1, 1.0);
    for (std::size_t i = 1; i <= k; ++i) {
      row[i] = row[i - 1] * static_cast<double>(k - i + 1) / static_cast<double>(i);
    }
    return row;
  };
  // powers of b2 up to gap_len
  std::vector<Scalar> b2_pow(gap_len + 1, Scalar(1.0));
  for (std::size_t i = 1; i <= gap_len; ++i) b2_pow[i] = b2_pow[i - 1] * beta[1];

  auto carried_factor = [&](std::size_t k) {  // (1 + b2)^k as sum_i C(k,i) b2^i
    const std::vector<double> c = binomial_row(k);
    Scalar s = 0.0;
    for (std::size_t i = 0; i <= k; ++i) s += c[i] * b2_pow[i];
    return s;
  };

  Scalar y_state = carried_factor(gap_len) * y_anchor;
  for (std::size_t j = 0; j < gap_len; ++j) {
    y_state += carried_factor(gap_len - 1 - j) * (beta[0] + beta[2] * z_window[j]);
  }
  return beta[0] + beta[1] * y_state + beta[2] * z_window[gap_len];
}

inline double expand_gap(double y_anchor, std::span<const double> z_window, const Beta& beta,
                         std::size_t gap_len) {
  return expand_gap<double>(y_anchor, z_window, beta.to_array(), gap_len);
}

// State on day T-1 (0-based T-2) and the predicted increment into day T,
// using only days 1..T-1 of the series.
struct LastStep {
  double anchor = 0.0;
  double increment = 0.0;
};

// Throws InsufficientDataError unless days 1..T-1 hold at least 2 reports.
LastStep predict_last_step(const HospitalSeries& series, const Beta& beta);

inline double predict_last_increment(const HospitalSeries& series, const Beta& beta) {
  return predict_last_step(series, beta).increment;
}

}  // namespace gapfit
