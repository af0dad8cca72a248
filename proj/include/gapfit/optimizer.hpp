#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gapfit/autodiff.hpp"
#include "gapfit/series.hpp"

namespace gapfit {

enum class Method { gradient_descent, adam };

std::string to_string(Method method);
// Accepts "gd" and "adam". Throws UsageError otherwise.
Method parse_method(const std::string& text);

struct AdamSettings {
  double decay1 = 0.9;
  double decay2 = 0.999;
  double epsilon = 1e-8;
};

struct FitConfig {
  // Per-parameter step sizes. The incidence coefficient steps an order of
  // magnitude smaller than the others.
  std::array<double, 3> eta{1e-3, 1e-3, 1e-4};
  std::size_t steps = 1000;
  double lambda = 0.0;
  Beta init{};
  Method method = Method::gradient_descent;
  AdamSettings adam{};
  // Multiplies the incidence covariate before fitting. Reported
  // coefficients are always in units of the unscaled covariate.
  double incidence_scale = 0.01;
  // Stops early once every gradient component is below this in magnitude.
  // 0 runs all steps.
  double gradient_tolerance = 0.0;

  // Throws UsageError on invalid settings.
  void validate() const;
};

struct FitResult {
  Beta beta{};
  // Objective at the starting point and after every completed step.
  std::vector<double> loss_trace;
  bool converged = false;
  std::size_t steps_used = 0;
  // Set when the fit must not be used and callers should fall back.
  bool fell_back = false;
};

// lambda * (b1^2 + b2^2 + b3^2)
template <class Scalar>
Scalar l2_penalty(const std::array<Scalar, 3>& beta, double lambda) {
  return lambda * (square(beta[0]) + square(beta[1]) + square(beta[2]));
}

inline double l2_penalty(const Beta& beta, double lambda) {
  return l2_penalty<double>(beta.to_array(), lambda);
}

// True iff the trace holds a non-finite entry, beta is not finite, or the
// last entry exceeds the first. Throws UsageError on an empty trace.
bool detect_divergence(std::span<const double> trace, const Beta& beta);

// Incremental fit of one series. fit() is a loop over step(); the cohort
// fitter drives several of these in lockstep and overwrites shared
// coefficients between steps.
class FitState {
 public:
  // Throws InsufficientDataError if the series cannot be scored and
  // UsageError for an invalid config.
  FitState(const HospitalSeries& series, const FitConfig& config);

  // One update from the current coefficients. Returns false once the fit
  // has stopped (diverged or reached the gradient tolerance).
  bool step();
  // Appends the objective at the final coefficients.
  void finish();

  bool active() const noexcept { return !stopped_; }
  bool diverged() const noexcept { return diverged_; }
  std::size_t steps_taken() const noexcept { return steps_taken_; }

  // Coefficients in the units of the unscaled covariate.
  Beta beta() const;
  // Coefficient i in the fitting parameterization (scaled covariate).
  double parameter(std::size_t i) const { return params_[i]; }
  void set_parameter(std::size_t i, double value) { params_[i] = value; }

  FitResult result() const;

 private:
  // Objective and gradient at params_, in the scaled parameterization.
  GradientResult objective();

  HospitalSeries scaled_;
  FitConfig config_;
  std::array<double, 3> params_{};
  std::array<double, 3> first_moment_{};
  std::array<double, 3> second_moment_{};
  GradientEvaluator evaluator_;
  std::vector<double> trace_;
  std::size_t steps_taken_ = 0;
  bool stopped_ = false;
  bool diverged_ = false;
  bool finished_ = false;
};

// Gradient descent (or ADAM) on loss + l2 penalty. The series is never
// modified.
FitResult fit(const HospitalSeries& series, const FitConfig& config);

}  // namespace gapfit
