#include "gapfit/series.hpp"

#include <algorithm>
#include <cmath>

#include "gapfit/errors.hpp"

namespace gapfit {

bool Beta::is_finite() const {
  return std::isfinite(b1) && std::isfinite(b2) && std::isfinite(b3);
}

HospitalSeries::HospitalSeries(std::string id, std::vector<std::optional<double>> cases,
                               std::vector<double> incidence)
    : id_(std::move(id)), cases_(std::move(cases)), incidence_(std::move(incidence)) {
  if (cases_.size() != incidence_.size()) {
    throw UsageError("series " + id_ + ": cases and incidence differ in length");
  }
  if (cases_.size() < 2) throw UsageError("series " + id_ + ": needs at least 2 days");
  for (const auto& y : cases_) {
    if (y && !(std::isfinite(*y) && *y >= 0.0)) {
      throw UsageError("series " + id_ + ": cases must be finite and nonnegative");
    }
  }
  for (double z : incidence_) {
    if (!(std::isfinite(z) && z >= 0.0)) {
      throw UsageError("series " + id_ + ": incidence must be finite and nonnegative");
    }
  }
}

std::vector<std::uint8_t> HospitalSeries::report_mask() const {
  std::vector<std::uint8_t> r(cases_.size());
  std::transform(cases_.begin(), cases_.end(), r.begin(),
                 [](const auto& y) { return static_cast<std::uint8_t>(y.has_value()); });
  return r;
}

std::size_t HospitalSeries::report_count() const {
  return static_cast<std::size_t>(
      std::count_if(cases_.begin(), cases_.end(), [](const auto& y) { return y.has_value(); }));
}

std::optional<std::size_t> HospitalSeries::first_report() const {
  for (std::size_t t = 0; t < cases_.size(); ++t) {
    if (cases_[t]) return t;
  }
  return std::nullopt;
}

HospitalSeries HospitalSeries::slice(std::size_t start, std::size_t length) const {
  if (start + length > days()) throw UsageError("slice exceeds series " + id_);
  return HospitalSeries(
      id_, std::vector<std::optional<double>>(cases_.begin() + start, cases_.begin() + start + length),
      std::vector<double>(incidence_.begin() + start, incidence_.begin() + start + length));
}

HospitalSeries HospitalSeries::with_incidence_scaled(double factor) const {
  HospitalSeries out = *this;
  for (double& z : out.incidence_) z *= factor;
  return out;
}

HospitalSeries HospitalSeries::censored(std::span<const std::uint8_t> keep) const {
  if (keep.size() != days()) throw UsageError("censor mask length mismatch for " + id_);
  HospitalSeries out = *this;
  for (std::size_t t = 0; t < keep.size(); ++t) {
    if (!keep[t]) out.cases_[t].reset();
  }
  return out;
}

}  // namespace gapfit
