#include "gapfit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gapfit/errors.hpp"
#include "gapfit/random.hpp"

namespace gapfit {

namespace {

struct Derivative {
  double ds, de, di, dr;
};

Derivative seir_rhs(const SeirParams& p, double population, const SeirState& x) {
  const double infection = p.transmission_rate * x.susceptible * x.infected / population;
  const double onset = p.incubation_rate * x.exposed;
  const double recovery = p.recovery_rate * x.infected;
  return {-infection, infection - onset, onset - recovery, recovery};
}

SeirState advance(const SeirState& x, const Derivative& d, double h) {
  return {x.susceptible + h * d.ds, x.exposed + h * d.de, x.infected + h * d.di,
          x.removed + h * d.dr};
}

bool valid_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

SeirRun simulate_seir(const SeirParams& params, std::size_t days, std::size_t substeps) {
  const SeirState& x0 = params.initial;
  if (!(params.transmission_rate >= 0.0 && params.incubation_rate >= 0.0 &&
        params.recovery_rate >= 0.0)) {
    throw UsageError("SEIR rates must be nonnegative");
  }
  if (!(x0.susceptible >= 0.0 && x0.exposed >= 0.0 && x0.infected >= 0.0 && x0.removed >= 0.0)) {
    throw UsageError("SEIR compartments must be nonnegative");
  }
  const double population = x0.total();
  if (!(population > 0.0 && std::isfinite(population))) throw UsageError("SEIR population must be positive");
  if (substeps == 0) throw UsageError("SEIR needs at least one substep per day");

  const double h = 1.0 / static_cast<double>(substeps);
  SeirRun run;
  run.states.reserve(days + 1);
  run.incidence.reserve(days);
  run.states.push_back(x0);
  SeirState x = x0;
  for (std::size_t day = 0; day < days; ++day) {
    const double s_start = x.susceptible;
    for (std::size_t k = 0; k < substeps; ++k) {
      const Derivative k1 = seir_rhs(params, population, x);
      const Derivative k2 = seir_rhs(params, population, advance(x, k1, h / 2));
      const Derivative k3 = seir_rhs(params, population, advance(x, k2, h / 2));
      const Derivative k4 = seir_rhs(params, population, advance(x, k3, h));
      const Derivative slope{(k1.ds + 2 * k2.ds + 2 * k3.ds + k4.ds) / 6,
                             (k1.de + 2 * k2.de + 2 * k3.de + k4.de) / 6,
                             (k1.di + 2 * k2.di + 2 * k3.di + k4.di) / 6,
                             (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr) / 6};
      x = advance(x, slope, h);
    }
    run.incidence.push_back(std::max(0.0, s_start - x.susceptible));
    run.states.push_back(x);
  }
  return run;
}

MissingnessSpec MissingnessSpec::registry_like() {
  MissingnessSpec m;
  m.complete_fraction = 0.36;
  m.mcar_rate = 0.04;
  m.gap_start_prob = 0.012;
  m.mean_gap_length = 5.0;
  return m;
}

void MissingnessSpec::validate() const {
  if (!valid_probability(complete_fraction) || !valid_probability(mcar_rate) ||
      !valid_probability(gap_start_prob)) {
    throw UsageError("missingness probabilities must lie in [0, 1]");
  }
  if (!(mean_gap_length >= 1.0 && std::isfinite(mean_gap_length))) {
    throw UsageError("mean gap length must be at least 1");
  }
}

std::vector<std::uint8_t> missingness_mask(std::size_t days, const MissingnessSpec& spec,
                                           std::uint64_t seed) {
  spec.validate();
  if (days < 2) throw UsageError("a mask needs at least 2 days");
  if (spec.complete_fraction < 1.0 && spec.mcar_rate >= 1.0) {
    throw UsageError("mcar_rate 1 never leaves a second report");
  }
  Rng rng(seed);
  if (rng.bernoulli(spec.complete_fraction)) return std::vector<std::uint8_t>(days, 1);

  // Geometric burst lengths on {1, 2, ...} with the configured mean.
  const double continue_prob = 1.0 - 1.0 / spec.mean_gap_length;
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<std::uint8_t> r(days, 1);
    for (std::size_t t = 1; t < days;) {
      if (rng.bernoulli(spec.gap_start_prob)) {
        std::size_t length = 1;
        while (rng.bernoulli(continue_prob)) ++length;
        for (std::size_t k = 0; k < length && t < days; ++k, ++t) r[t] = 0;
        continue;
      }
      if (rng.bernoulli(spec.mcar_rate)) r[t] = 0;
      ++t;
    }
    if (std::count(r.begin(), r.end(), std::uint8_t{1}) >= 2) return r;
  }
  throw UsageError("missingness spec does not yield 2 reports");
}

void SimSpec::validate() const {
  if (hospitals < 1) throw UsageError("need at least one hospital");
  if (days < 2) throw UsageError("need at least 2 days");
  missingness.validate();
  if (!(noise >= 0.0 && std::isfinite(noise))) throw UsageError("noise must be nonnegative");
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(beta_range.lo[i] <= beta_range.hi[i])) throw UsageError("empty coefficient range");
  }
  if (!(catchment_lo > 0.0 && catchment_lo <= catchment_hi)) {
    throw UsageError("catchment range must be positive and ordered");
  }
  if (!(initial_cases_lo >= 0.0 && initial_cases_lo <= initial_cases_hi)) {
    throw UsageError("initial case range must be nonnegative and ordered");
  }
  if (seir_substeps == 0) throw UsageError("SEIR needs at least one substep per day");
}

SimulatedCohort simulate_cohort(const SimSpec& spec) {
  spec.validate();
  const SeirRun seir = simulate_seir(spec.seir, spec.seir_offset + spec.days, spec.seir_substeps);
  const std::vector<double> state_incidence(seir.incidence.begin() + static_cast<std::ptrdiff_t>(spec.seir_offset),
                                            seir.incidence.end());

  SimulatedCohort out;
  out.cohort.reserve(spec.hospitals);
  out.truth.reserve(spec.hospitals);
  for (std::size_t k = 0; k < spec.hospitals; ++k) {
    char id[16];
    std::snprintf(id, sizeof id, "H%04zu", k + 1);

    Rng rng(derive_seed(spec.seed, {0, k}));
    Beta beta;
    for (std::size_t i = 0; i < 3; ++i) beta[i] = rng.uniform(spec.beta_range.lo[i], spec.beta_range.hi[i]);
    const double catchment = rng.uniform(spec.catchment_lo, spec.catchment_hi);
    std::vector<double> z(spec.days);
    for (std::size_t t = 0; t < spec.days; ++t) z[t] = catchment * state_incidence[t];

    std::vector<double> y(spec.days);
    y[0] = rng.uniform(spec.initial_cases_lo, spec.initial_cases_hi);
    for (std::size_t t = 1; t < spec.days; ++t) {
      const double increment = beta.b1 + beta.b2 * y[t - 1] + beta.b3 * z[t - 1];
      const double noise = spec.noise > 0.0 ? spec.noise * rng.normal() : 0.0;
      y[t] = std::max(0.0, y[t - 1] + increment + noise);
    }

    const auto mask = missingness_mask(spec.days, spec.missingness, derive_seed(spec.seed, {1, k}));
    std::vector<std::optional<double>> cases(spec.days);
    for (std::size_t t = 0; t < spec.days; ++t) {
      if (mask[t]) cases[t] = y[t];
    }
    out.cohort.emplace_back(id, std::move(cases), std::move(z));
    out.truth.push_back({id, beta, std::move(y)});
  }
  return out;
}

}  // namespace gapfit
