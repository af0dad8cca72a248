#pragma once

// Joint fitting of a cohort with some coefficients shared globally. Every
// hospital takes one gradient step from its current coefficients, then each
// shared coefficient is replaced by the cross-hospital mean before the next
// step.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapfit/optimizer.hpp"
#include "gapfit/series.hpp"

namespace gapfit {

struct SharingSpec {
  std::array<bool, 3> shared{};

  static SharingSpec none() { return {}; }
  static SharingSpec all() { return {{true, true, true}}; }
  // "none" or a comma list drawn from b1, b2, b3. Throws UsageError.
  static SharingSpec parse(const std::string& text);
  // The eight global/individual combinations in report order: the four
  // with b2 global first, then the four with b2 individual.
  static std::vector<SharingSpec> all_combinations();

  bool any() const { return shared[0] || shared[1] || shared[2]; }
  // Canonical flag form, e.g. "b1,b3" or "none".
  std::string label() const;
  // Human-readable form, e.g. "global b1; individual b2; global b3".
  std::string describe() const;

  friend bool operator==(const SharingSpec&, const SharingSpec&) = default;
};

struct CohortFit {
  std::vector<FitResult> fits;
  // Cross-hospital mean of each shared coefficient after every step; empty
  // for individual coefficients.
  std::array<std::vector<double>, 3> mean_trace;
  // Reason a hospital could not be fitted at all; empty when it was.
  std::vector<std::string> failures;

  bool fitted(std::size_t k) const { return failures[k].empty(); }
};

struct SharingOptions {
  std::size_t threads = 1;
  // Called after the means of every step are applied, with the current
  // coefficients of all hospitals (unfitted ones hold the initial value).
  std::function<void(std::size_t step, std::span<const Beta> betas)> on_step;
};

// Hospitals that cannot be scored are flagged in `failures`. Hospitals that
// diverge mid-run stop stepping and are dropped from later means. With no
// shared dimension this reduces to independent fit() calls.
CohortFit fit_shared(const Cohort& cohort, const SharingSpec& spec, const FitConfig& config,
                     const SharingOptions& options = {});

// Mean that does not depend on the order of `values`: the values are sorted
// and summed as offsets from the smallest, so the mean of equal values is
// exactly that value.
double order_free_mean(std::span<const double> values);

}  // namespace gapfit
