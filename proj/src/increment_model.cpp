#include "gapfit/increment_model.hpp"

#include <string>

namespace gapfit {

namespace {

double step(const Beta& beta, double y_tilde, double z) {
  return beta.b1 + beta.b2 * y_tilde + beta.b3 * z;
}

void require_reports(const HospitalSeries& series, std::size_t count, std::size_t needed) {
  if (count < needed) {
    throw InsufficientDataError("series " + series.id() + " has fewer than " + std::to_string(needed) +
                                (needed == 1 ? " report" : " reports"));
  }
}

}  // namespace

Trajectory predict_trajectory(const HospitalSeries& series, const Beta& beta) {
  require_reports(series, series.report_count(), 1);
  const auto& y = series.cases();
  const auto z = series.incidence();
  const std::size_t first = *series.first_report();

  Trajectory out;
  out.y_tilde.resize(y.size());
  out.dy_hat.resize(y.size());
  out.y_tilde[first] = *y[first];
  for (std::size_t t = first + 1; t < y.size(); ++t) {
    const double previous = *out.y_tilde[t - 1];
    const double dy = step(beta, previous, z[t - 1]);
    out.dy_hat[t] = dy;
    out.y_tilde[t] = y[t] ? *y[t] : previous + dy;
  }
  return out;
}

std::vector<double> forecast(const HospitalSeries& series, const Beta& beta,
                             std::span<const double> future_incidence, std::size_t horizon) {
  if (horizon > 0 && future_incidence.size() + 1 < horizon) {
    throw UsageError("forecast: horizon " + std::to_string(horizon) + " needs " +
                     std::to_string(horizon - 1) + " future incidence values");
  }
  const Trajectory traj = predict_trajectory(series, beta);
  std::vector<double> levels;
  levels.reserve(horizon);
  double state = *traj.y_tilde.back();
  double z = series.incidence().back();
  for (std::size_t k = 0; k < horizon; ++k) {
    state += step(beta, state, z);
    levels.push_back(state);
    if (k < future_incidence.size()) z = future_incidence[k];
  }
  return levels;
}

LastStep predict_last_step(const HospitalSeries& series, const Beta& beta) {
  if (series.days() < 3) {
    throw InsufficientDataError("series " + series.id() + " is too short to withhold a day");
  }
  const HospitalSeries history = series.truncated(series.days() - 1);
  require_reports(history, history.report_count(), 2);
  const Trajectory traj = predict_trajectory(history, beta);
  LastStep out;
  out.anchor = *traj.y_tilde.back();
  out.increment = step(beta, out.anchor, history.incidence().back());
  return out;
}

}  // namespace gapfit
