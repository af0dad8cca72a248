#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gapfit {

// Regression coefficients of the increment model:
// intercept (cases/day), per prevalent case, per incident case.
struct Beta {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;

  std::array<double, 3> to_array() const { return {b1, b2, b3}; }
  static Beta from_array(std::span<const double, 3> v) { return {v[0], v[1], v[2]}; }
  double operator[](std::size_t i) const { return i == 0 ? b1 : (i == 1 ? b2 : b3); }
  double& operator[](std::size_t i) { return i == 0 ? b1 : (i == 1 ? b2 : b3); }
  bool is_finite() const;

  friend bool operator==(const Beta&, const Beta&) = default;
};

// One hospital's daily prevalent-case reports and the incidence covariate.
// Day indices are 0-based in the API and 1-based in files. A missing
// report is an empty optional; the report mask is derived from it.
class HospitalSeries {
 public:
  HospitalSeries() = default;
  // Throws UsageError unless both sequences have the same length >= 2 and
  // all values are finite and nonnegative.
  HospitalSeries(std::string id, std::vector<std::optional<double>> cases,
                 std::vector<double> incidence);

  const std::string& id() const noexcept { return id_; }
  std::size_t days() const noexcept { return cases_.size(); }
  const std::vector<std::optional<double>>& cases() const noexcept { return cases_; }
  std::span<const double> incidence() const noexcept { return incidence_; }
  bool reported(std::size_t t) const { return cases_[t].has_value(); }

  std::vector<std::uint8_t> report_mask() const;
  std::size_t report_count() const;
  std::optional<std::size_t> first_report() const;
  bool fully_reported() const { return report_count() == days(); }

  // Days [start, start + length), 0-based.
  HospitalSeries slice(std::size_t start, std::size_t length) const;
  HospitalSeries truncated(std::size_t length) const { return slice(0, length); }
  HospitalSeries with_incidence_scaled(double factor) const;
  // Drops the reports where keep[t] == 0.
  HospitalSeries censored(std::span<const std::uint8_t> keep) const;

  friend bool operator==(const HospitalSeries&, const HospitalSeries&) = default;

 private:
  std::string id_;
  std::vector<std::optional<double>> cases_;
  std::vector<double> incidence_;
};

using Cohort = std::vector<HospitalSeries>;

}  // namespace gapfit
