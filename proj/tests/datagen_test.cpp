#include "gapfit/datagen.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gapfit/increment_model.hpp"
#include "gapfit/optimizer.hpp"

namespace gapfit {
namespace {

TEST(Seir, ConservesPopulation) {
  for (double beta : {0.0, 0.2, 0.35, 0.8}) {
    SeirParams p;
    p.transmission_rate = beta;
    const double n = p.initial.total();
    const SeirRun run = simulate_seir(p, 120);
    ASSERT_EQ(run.states.size(), 121u);
    ASSERT_EQ(run.incidence.size(), 120u);
    for (const auto& x : run.states) {
      EXPECT_NEAR(x.total(), n, 1e-12 * n);
      EXPECT_GE(x.susceptible, 0.0);
      EXPECT_GE(x.exposed, 0.0);
      EXPECT_GE(x.infected, 0.0);
      EXPECT_GE(x.removed, 0.0);
    }
  }
}

TEST(Seir, NoTransmissionMeansNoIncidence) {
  SeirParams p;
  p.transmission_rate = 0.0;
  p.initial.exposed = 0.0;
  const SeirRun run = simulate_seir(p, 50);
  for (double v : run.incidence) EXPECT_EQ(v, 0.0);
  for (std::size_t d = 1; d < run.states.size(); ++d) {
    EXPECT_LE(run.states[d].infected, run.states[d - 1].infected);
  }
}

TEST(Seir, StepHalvingConverges) {
  const SeirParams p;
  const SeirRun coarse = simulate_seir(p, 110, 24);
  const SeirRun fine = simulate_seir(p, 110, 48);
  for (std::size_t d = 0; d < coarse.incidence.size(); ++d) {
    EXPECT_LT(std::abs(coarse.incidence[d] - fine.incidence[d]), 1e-6 * std::abs(fine.incidence[d]))
        << "day " << d;
  }
}

TEST(Seir, RejectsInvalidInput) {
  SeirParams p;
  p.recovery_rate = -1.0;
  EXPECT_THROW((void)simulate_seir(p, 10), UsageError);
  p = SeirParams{};
  p.initial = {};
  EXPECT_THROW((void)simulate_seir(p, 10), UsageError);
  EXPECT_THROW((void)simulate_seir(SeirParams{}, 10, 0), UsageError);
}

TEST(Mask, NoMissingnessReportsEverything) {
  const auto r = missingness_mask(70, MissingnessSpec{}, 5);
  EXPECT_TRUE(std::all_of(r.begin(), r.end(), [](auto v) { return v == 1; }));
}

TEST(Mask, DeterministicAndAnchored) {
  const MissingnessSpec spec{.complete_fraction = 0.0, .mcar_rate = 0.3, .gap_start_prob = 0.05, .mean_gap_length = 4.0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = missingness_mask(20, spec, seed);
    EXPECT_EQ(r, missingness_mask(20, spec, seed));
    EXPECT_EQ(r[0], 1);
    EXPECT_GE(std::count(r.begin(), r.end(), std::uint8_t{1}), 2);
  }
}

TEST(Mask, HeavyMissingnessStillLeavesTwoReports) {
  const MissingnessSpec spec{.complete_fraction = 0.0, .mcar_rate = 0.97, .gap_start_prob = 0.0, .mean_gap_length = 1.0};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = missingness_mask(5, spec, seed);
    EXPECT_GE(std::count(r.begin(), r.end(), std::uint8_t{1}), 2);
  }
}

TEST(Mask, ImpossibleSpecsThrow) {
  EXPECT_THROW((void)missingness_mask(10, MissingnessSpec{.mcar_rate = 1.0}, 1), UsageError);
  EXPECT_THROW((void)missingness_mask(10, MissingnessSpec{.mcar_rate = 1.5}, 1), UsageError);
  EXPECT_THROW((void)missingness_mask(10, MissingnessSpec{.mean_gap_length = 0.5}, 1), UsageError);
  EXPECT_THROW((void)missingness_mask(1, MissingnessSpec{}, 1), UsageError);
}

TEST(Mask, RegistryDefaultsMatchCalibrationTarget) {
  SimSpec spec;
  spec.hospitals = 1000;
  spec.days = 70;
  spec.missingness = MissingnessSpec::registry_like();
  const SimulatedCohort sim = simulate_cohort(spec);
  std::size_t missing = 0;
  std::size_t complete = 0;
  std::size_t long_gaps = 0;
  for (const auto& s : sim.cohort) {
    const std::size_t reports = s.report_count();
    missing += s.days() - reports;
    complete += reports == s.days();
    std::size_t run = 0;
    bool has_long = false;
    for (std::size_t t = 0; t < s.days(); ++t) {
      run = s.reported(t) ? 0 : run + 1;
      has_long = has_long || run >= 5;
    }
    long_gaps += has_long;
  }
  const double fraction = static_cast<double>(missing) / (1000.0 * 70.0);
  EXPECT_NEAR(fraction, 0.064, 0.01);
  EXPECT_GT(complete, 250u);
  EXPECT_GT(long_gaps, 50u);
}

TEST(Mask, MissingFractionApproachesConfiguredRate) {
  const MissingnessSpec spec{.complete_fraction = 0.0, .mcar_rate = 0.2, .gap_start_prob = 0.0, .mean_gap_length = 1.0};
  std::size_t missing = 0;
  const std::size_t hospitals = 2000;
  const std::size_t days = 101;
  for (std::size_t k = 0; k < hospitals; ++k) {
    const auto r = missingness_mask(days, spec, k);
    missing += static_cast<std::size_t>(std::count(r.begin() + 1, r.end(), std::uint8_t{0}));
  }
  // day 1 is never missing, so the rate applies to the other 100 days
  EXPECT_NEAR(static_cast<double>(missing) / (hospitals * 100.0), 0.2, 0.005);
}

TEST(Cohort, NoiselessTruthHasZeroLoss) {
  SimSpec spec;
  spec.hospitals = 50;
  const SimulatedCohort sim = simulate_cohort(spec);
  ASSERT_EQ(sim.cohort.size(), 50u);
  EXPECT_EQ(sim.cohort[0].id(), "H0001");
  EXPECT_EQ(sim.cohort[49].id(), "H0050");
  for (std::size_t k = 0; k < sim.cohort.size(); ++k) {
    EXPECT_TRUE(sim.cohort[k].fully_reported());
    EXPECT_LT(loss(sim.cohort[k], sim.truth[k].beta), 1e-20);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_GE(sim.truth[k].beta[i], spec.beta_range.lo[i]);
      EXPECT_LE(sim.truth[k].beta[i], spec.beta_range.hi[i]);
    }
  }
}

TEST(Cohort, NoiselessMissingDataFitRecoversTruth) {
  SimSpec spec;
  spec.hospitals = 5;
  spec.missingness.mcar_rate = 0.25;
  const SimulatedCohort sim = simulate_cohort(spec);
  FitConfig c;
  c.method = Method::adam;
  c.eta = {1e-3, 1e-3, 1e-3};
  c.steps = 30000;
  c.gradient_tolerance = 1e-9;
  for (std::size_t k = 0; k < sim.cohort.size(); ++k) {
    const FitResult r = fit(sim.cohort[k], c);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.beta[i], sim.truth[k].beta[i], 1e-3);
  }
}

TEST(Cohort, ObservedValuesComeFromTruth) {
  SimSpec spec;
  spec.hospitals = 20;
  spec.noise = 1.0;
  spec.missingness = MissingnessSpec::registry_like();
  const SimulatedCohort sim = simulate_cohort(spec);
  for (std::size_t k = 0; k < sim.cohort.size(); ++k) {
    const auto& y = sim.cohort[k].cases();
    for (std::size_t t = 0; t < y.size(); ++t) {
      EXPECT_GE(sim.truth[k].cases[t], 0.0);
      if (y[t]) EXPECT_EQ(*y[t], sim.truth[k].cases[t]);
    }
  }
}

TEST(Cohort, SeedDeterminesEverything) {
  SimSpec spec;
  spec.hospitals = 30;
  spec.noise = 0.7;
  spec.missingness = MissingnessSpec::registry_like();
  const SimulatedCohort a = simulate_cohort(spec);
  const SimulatedCohort b = simulate_cohort(spec);
  EXPECT_EQ(a.cohort, b.cohort);
  spec.seed = 2;
  const SimulatedCohort c = simulate_cohort(spec);
  EXPECT_NE(a.cohort, c.cohort);
}

TEST(SimSpec, Validation) {
  SimSpec spec;
  spec.days = 1;
  EXPECT_THROW(spec.validate(), UsageError);
  spec = SimSpec{};
  spec.noise = -1.0;
  EXPECT_THROW(spec.validate(), UsageError);
  spec = SimSpec{};
  spec.missingness.gap_start_prob = 2.0;
  EXPECT_THROW(spec.validate(), UsageError);
  spec = SimSpec{};
  spec.catchment_lo = 0.0;
  EXPECT_THROW(spec.validate(), UsageError);
}

}  // namespace
}  // namespace gapfit
