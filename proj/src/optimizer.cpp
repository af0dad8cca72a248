#include "gapfit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gapfit/errors.hpp"
#include "gapfit/increment_model.hpp"

namespace gapfit {

std::string to_string(Method method) {
  return method == Method::adam ? "adam" : "gd";
}

Method parse_method(const std::string& text) {
  if (text == "gd") return Method::gradient_descent;
  if (text == "adam") return Method::adam;
  throw UsageError("unknown method '" + text + "' (expected gd or adam)");
}

void FitConfig::validate() const {
  for (double e : eta) {
    if (!(std::isfinite(e) && e > 0.0)) throw UsageError("step sizes must be positive");
  }
  if (steps < 1) throw UsageError("steps must be at least 1");
  if (!(std::isfinite(lambda) && lambda >= 0.0)) throw UsageError("lambda must be nonnegative");
  if (!init.is_finite()) throw UsageError("initial coefficients must be finite");
  if (!(std::isfinite(incidence_scale) && incidence_scale > 0.0)) {
    throw UsageError("incidence scale must be positive");
  }
  if (!(gradient_tolerance >= 0.0)) throw UsageError("gradient tolerance must be nonnegative");
  if (method == Method::adam) {
    if (!(adam.decay1 >= 0.0 && adam.decay1 < 1.0 && adam.decay2 >= 0.0 && adam.decay2 < 1.0)) {
      throw UsageError("ADAM decay rates must lie in [0, 1)");
    }
    if (!(adam.epsilon > 0.0)) throw UsageError("ADAM epsilon must be positive");
  }
}

bool detect_divergence(std::span<const double> trace, const Beta& beta) {
  if (trace.empty()) throw UsageError("detect_divergence: empty trace");
  if (!beta.is_finite()) return true;
  for (double v : trace) {
    if (!std::isfinite(v)) return true;
  }
  return trace.back() > trace.front();
}

FitState::FitState(const HospitalSeries& series, const FitConfig& config)
    : scaled_(series.with_incidence_scaled(config.incidence_scale)), config_(config) {
  config_.validate();
  if (scaled_.report_count() < 2) {
    throw InsufficientDataError("series " + series.id() + " has fewer than 2 reports");
  }
  params_ = {config.init.b1, config.init.b2, config.init.b3 / config.incidence_scale};
  trace_.reserve(config.steps + 1);
}

GradientResult FitState::objective() {
  return evaluator_(
      [this](std::span<const DiffScalar> x) {
        const std::array<DiffScalar, 3> b{x[0], x[1], x[2]};
        DiffScalar value = loss(scaled_, b);
        if (config_.lambda > 0.0) value += l2_penalty(b, config_.lambda);
        return value;
      },
      params_);
}

bool FitState::step() {
  if (stopped_) return false;
  GradientResult g;
  try {
    g = objective();
  } catch (const EvaluationError&) {
    trace_.push_back(std::numeric_limits<double>::infinity());
    diverged_ = stopped_ = true;
    return false;
  }
  trace_.push_back(g.value);
  if (!std::all_of(g.gradient.begin(), g.gradient.end(), [](double v) { return std::isfinite(v); })) {
    diverged_ = stopped_ = true;
    return false;
  }
  if (config_.gradient_tolerance > 0.0 &&
      std::all_of(g.gradient.begin(), g.gradient.end(),
                  [&](double v) { return std::abs(v) < config_.gradient_tolerance; })) {
    stopped_ = finished_ = true;
    return false;
  }

  ++steps_taken_;
  if (config_.method == Method::gradient_descent) {
    for (std::size_t i = 0; i < 3; ++i) params_[i] -= config_.eta[i] * g.gradient[i];
  } else {
    const AdamSettings& a = config_.adam;
    const double t = static_cast<double>(steps_taken_);
    const double correction1 = 1.0 - std::pow(a.decay1, t);
    const double correction2 = 1.0 - std::pow(a.decay2, t);
    for (std::size_t i = 0; i < 3; ++i) {
      first_moment_[i] = a.decay1 * first_moment_[i] + (1.0 - a.decay1) * g.gradient[i];
      second_moment_[i] =
          a.decay2 * second_moment_[i] + (1.0 - a.decay2) * g.gradient[i] * g.gradient[i];
      const double m = first_moment_[i] / correction1;
      const double v = second_moment_[i] / correction2;
      params_[i] -= config_.eta[i] * m / (std::sqrt(v) + a.epsilon);
    }
  }
  if (!std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); })) {
    diverged_ = stopped_ = true;
    return false;
  }
  return true;
}

void FitState::finish() {
  if (finished_ || diverged_) return;
  finished_ = stopped_ = true;
  double value = loss<double>(scaled_, params_);
  if (config_.lambda > 0.0) value += l2_penalty<double>(params_, config_.lambda);
  trace_.push_back(value);
  if (!std::isfinite(value)) diverged_ = true;
}

Beta FitState::beta() const {
  return {params_[0], params_[1], params_[2] * config_.incidence_scale};
}

FitResult FitState::result() const {
  FitResult r;
  r.beta = beta();
  r.loss_trace = trace_;
  r.steps_used = steps_taken_;
  r.converged = !diverged_ && !trace_.empty() && !detect_divergence(trace_, r.beta);
  r.fell_back = !r.converged;
  return r;
}

FitResult fit(const HospitalSeries& series, const FitConfig& config) {
  FitState state(series, config);
  for (std::size_t s = 0; s < config.steps; ++s) {
    if (!state.step()) break;
  }
  state.finish();
  return state.result();
}

}  // namespace gapfit
