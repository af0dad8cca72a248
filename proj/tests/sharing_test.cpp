#include "gapfit/sharing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "gapfit/datagen.hpp"
#include "gapfit/optimizer.hpp"

namespace gapfit {
namespace {

Cohort noisy_cohort(std::size_t hospitals, std::uint64_t seed) {
  SimSpec spec;
  spec.hospitals = hospitals;
  spec.days = 30;
  spec.noise = 0.5;
  spec.missingness = MissingnessSpec::registry_like();
  spec.seed = seed;
  return simulate_cohort(spec).cohort;
}

FitConfig short_config() {
  FitConfig c;
  c.steps = 150;
  return c;
}

TEST(SharingSpec, ParseAndLabel) {
  EXPECT_EQ(SharingSpec::parse("none"), SharingSpec::none());
  EXPECT_EQ(SharingSpec::parse("b1,b2,b3"), SharingSpec::all());
  const SharingSpec s = SharingSpec::parse("b3,b1");
  EXPECT_EQ(s.label(), "b1,b3");
  EXPECT_EQ(s.describe(), "global b1; individual b2; global b3");
  EXPECT_EQ(SharingSpec::none().label(), "none");
  EXPECT_THROW((void)SharingSpec::parse("b4"), UsageError);
}

TEST(SharingSpec, EightDistinctCombinations) {
  const auto all = SharingSpec::all_combinations();
  ASSERT_EQ(all.size(), 8u);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_FALSE(all[i] == all[j]);
    EXPECT_EQ(SharingSpec::parse(all[i].label()), all[i]);
  }
}

TEST(OrderFreeMean, IndependentOfOrder) {
  std::vector<double> v{1e16, 1.0, -1e16, 3.5, 0.25, 7.0};
  const double m = order_free_mean(v);
  std::sort(v.begin(), v.end());
  do {
    ASSERT_EQ(order_free_mean(v), m);
  } while (std::next_permutation(v.begin(), v.end()));
  const std::vector<double> same(9, 0.1);
  EXPECT_EQ(order_free_mean(same), 0.1);
  EXPECT_THROW((void)order_free_mean(std::vector<double>{}), UsageError);
}

TEST(FitShared, SharedCoefficientsEqualAfterEveryStep) {
  const Cohort cohort = noisy_cohort(8, 3);
  for (const SharingSpec& spec : SharingSpec::all_combinations()) {
    if (!spec.any()) continue;
    std::size_t calls = 0;
    SharingOptions options;
    options.on_step = [&](std::size_t step, std::span<const Beta> betas) {
      EXPECT_EQ(step, calls);
      ++calls;
      for (std::size_t j = 0; j < 3; ++j) {
        if (!spec.shared[j]) continue;
        for (const Beta& b : betas) EXPECT_LE(std::abs(b[j] - betas[0][j]), 1e-15) << spec.label();
      }
    };
    const CohortFit fit = fit_shared(cohort, spec, short_config(), options);
    EXPECT_EQ(calls, short_config().steps);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(fit.mean_trace[j].size(), spec.shared[j] ? calls : 0u);
      if (spec.shared[j]) {
        for (const auto& f : fit.fits) EXPECT_EQ(f.beta[j], fit.mean_trace[j].back());
      }
    }
  }
}

TEST(FitShared, NoSharingMatchesIndependentFitsBitwise) {
  const Cohort cohort = noisy_cohort(10, 5);
  FitConfig config = short_config();
  config.method = Method::adam;
  config.gradient_tolerance = 1e-4;
  const CohortFit joint = fit_shared(cohort, SharingSpec::none(), config);
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    const FitResult alone = fit(cohort[k], config);
    EXPECT_EQ(joint.fits[k].beta, alone.beta);
    EXPECT_EQ(joint.fits[k].loss_trace, alone.loss_trace);
    EXPECT_EQ(joint.fits[k].converged, alone.converged);
  }
}

TEST(FitShared, IdenticalHospitalsMatchSingleFit) {
  const Cohort one = noisy_cohort(1, 9);
  const Cohort copies(5, one.front());
  const FitResult alone = fit(one.front(), short_config());
  const CohortFit joint = fit_shared(copies, SharingSpec::all(), short_config());
  for (const auto& f : joint.fits) {
    EXPECT_EQ(f.beta, alone.beta);
    EXPECT_EQ(f.loss_trace, alone.loss_trace);
  }
}

TEST(FitShared, TwoHospitalsShareOnlyIntercept) {
  const Cohort cohort = noisy_cohort(2, 17);
  const CohortFit joint = fit_shared(cohort, SharingSpec::parse("b1"), short_config());
  EXPECT_EQ(joint.fits[0].beta.b1, joint.fits[1].beta.b1);
  EXPECT_NE(joint.fits[0].beta.b2, joint.fits[1].beta.b2);
  EXPECT_NE(joint.fits[0].beta.b3, joint.fits[1].beta.b3);
}

TEST(FitShared, PermutationInvariant) {
  const Cohort cohort = noisy_cohort(7, 21);
  Cohort reversed(cohort.rbegin(), cohort.rend());
  for (const SharingSpec& spec : SharingSpec::all_combinations()) {
    const CohortFit a = fit_shared(cohort, spec, short_config());
    const CohortFit b = fit_shared(reversed, spec, short_config());
    for (std::size_t k = 0; k < cohort.size(); ++k) {
      EXPECT_EQ(a.fits[k].beta, b.fits[cohort.size() - 1 - k].beta) << spec.label();
    }
  }
}

TEST(FitShared, ThreadCountDoesNotChangeResults) {
  const Cohort cohort = noisy_cohort(9, 2);
  const SharingSpec spec = SharingSpec::parse("b2");
  const CohortFit serial = fit_shared(cohort, spec, short_config());
  const CohortFit threaded = fit_shared(cohort, spec, short_config(), {.threads = 4, .on_step = {}});
  for (std::size_t k = 0; k < cohort.size(); ++k) EXPECT_EQ(serial.fits[k].beta, threaded.fits[k].beta);
}

TEST(FitShared, UnscorableHospitalsAreFlagged) {
  Cohort cohort = noisy_cohort(3, 4);
  cohort.emplace_back("EMPTY", std::vector<std::optional<double>>{std::nullopt, 4.0, std::nullopt},
                      std::vector<double>{1.0, 1.0, 1.0});
  const CohortFit joint = fit_shared(cohort, SharingSpec::all(), short_config());
  EXPECT_FALSE(joint.fitted(3));
  EXPECT_TRUE(joint.fits[3].fell_back);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_TRUE(joint.fitted(k));
  EXPECT_EQ(joint.fits[0].beta, joint.fits[2].beta);
}

TEST(FitShared, DivergedHospitalsLeaveTheMean) {
  Cohort cohort = noisy_cohort(3, 4);
  // A series that explodes under large steps while the others stay tame.
  std::vector<std::optional<double>> wild(30);
  std::vector<double> z(30, 0.0);
  for (std::size_t t = 0; t < 30; ++t) wild[t] = (t % 2) ? 5000.0 : 0.0;
  cohort.emplace_back("WILD", wild, z);
  FitConfig config = short_config();
  config.eta = {1e-3, 1e-3, 1e-4};
  const CohortFit joint = fit_shared(cohort, SharingSpec::parse("b3"), config);
  EXPECT_FALSE(joint.fits[3].converged);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(joint.fits[k].beta.b3, joint.mean_trace[2].back());
}

}  // namespace
}  // namespace gapfit
