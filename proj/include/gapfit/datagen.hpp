#pragma once

// Synthetic cohorts with known ground truth. A fixed-rate SEIR model gives
// the state-level incidence; each hospital sees a scaled share of it and
// evolves its prevalent cases by the increment model plus Gaussian noise.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gapfit/series.hpp"

namespace gapfit {

struct SeirState {
  double susceptible = 0.0;
  double exposed = 0.0;
  double infected = 0.0;
  double removed = 0.0;

  double total() const { return susceptible + exposed + infected + removed; }
};

struct SeirParams {
  double transmission_rate = 0.35;  // per day
  double incubation_rate = 0.2;     // 1 / mean latent period
  double recovery_rate = 1.0 / 7.0;
  SeirState initial{999'000.0, 600.0, 400.0, 0.0};
};

struct SeirRun {
  // New infections (flow out of S) on each day.
  std::vector<double> incidence;
  // State at the start of day 1 and the end of every day (days + 1 entries).
  std::vector<SeirState> states;
};

// Classical 4th-order Runge-Kutta with `substeps` fixed steps per day.
// Throws UsageError for negative rates or compartments, an empty
// population, or zero substeps.
SeirRun simulate_seir(const SeirParams& params, std::size_t days, std::size_t substeps = 24);

struct MissingnessSpec {
  // Probability a hospital reports every day.
  double complete_fraction = 0.0;
  // Per-day probability of an isolated missing report.
  double mcar_rate = 0.0;
  // Per-day probability that a burst of consecutive missing reports starts.
  double gap_start_prob = 0.0;
  // Mean burst length; lengths are geometric on {1, 2, ...}.
  double mean_gap_length = 1.0;

  // Defaults calibrated to a registry with about 6.4% missing daily
  // reports, a third of hospitals reporting completely, and occasional gaps
  // of five or more days.
  static MissingnessSpec registry_like();
  void validate() const;
};

// Day 1 is always reported and at least 2 reports are guaranteed by
// resampling. Throws UsageError if the spec cannot yield 2 reports.
std::vector<std::uint8_t> missingness_mask(std::size_t days, const MissingnessSpec& spec,
                                           std::uint64_t seed);

struct BetaRange {
  Beta lo{0.05, -0.12, 0.0005};
  Beta hi{0.4, -0.03, 0.004};
};

struct SimSpec {
  std::size_t hospitals = 100;
  std::size_t days = 70;
  BetaRange beta_range{};
  // Standard deviation of the Gaussian noise added to each daily increment.
  double noise = 0.0;
  MissingnessSpec missingness{};
  SeirParams seir{};
  std::size_t seir_substeps = 24;
  // SEIR days simulated before day 1.
  std::size_t seir_offset = 40;
  // Each hospital's share of the state incidence, drawn uniformly.
  double catchment_lo = 0.005;
  double catchment_hi = 0.01;
  double initial_cases_lo = 0.0;
  double initial_cases_hi = 10.0;
  std::uint64_t seed = 1;

  // Throws UsageError on invalid settings.
  void validate() const;
};

struct GroundTruth {
  std::string id;
  Beta beta{};
  // Full generated trajectory, including days later masked as missing.
  std::vector<double> cases;
};

struct SimulatedCohort {
  Cohort cohort;
  std::vector<GroundTruth> truth;
};

// Hospital ids are "H0001", "H0002", ... Generated cases are clamped at 0.
SimulatedCohort simulate_cohort(const SimSpec& spec);

}  // namespace gapfit
