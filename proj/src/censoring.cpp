#include <cmath>
#include <numeric>

#include "gapfit/errors.hpp"
#include "gapfit/evaluation.hpp"
#include "gapfit/increment_model.hpp"
#include "gapfit/parallel.hpp"
#include "gapfit/random.hpp"

namespace gapfit {

std::vector<std::uint8_t> censor_mask(std::size_t days, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate < 1.0)) throw UsageError("censoring rate must lie in (0, 1)");
  const auto censored = static_cast<std::size_t>(std::llround(rate * static_cast<double>(days)));
  if (days < 2 || censored + 2 > days) {
    throw UsageError("censoring " + std::to_string(censored) + " of " + std::to_string(days) +
                     " days leaves fewer than 2 reports");
  }
  // Partial Fisher-Yates over days 2..T; day 1 anchors the recursion.
  std::vector<std::size_t> candidates(days - 1);
  std::iota(candidates.begin(), candidates.end(), std::size_t{1});
  Rng rng(seed);
  std::vector<std::uint8_t> keep(days, 1);
  for (std::size_t i = 0; i < censored; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
    keep[candidates[i]] = 0;
  }
  return keep;
}

namespace {

std::vector<double> bridge_benchmark(const HospitalSeries& s, ModelKind kind) {
  const auto& y = s.cases();
  const auto z = s.incidence();
  const std::vector<double> imputed = locf_impute(y);
  const std::size_t days = y.size();
  const double mean_increment =
      (imputed.back() - imputed.front()) / static_cast<double>(days - 1);
  Beta linreg{};
  if (kind == ModelKind::linreg_locf) linreg = fit_linreg_locf(s).beta;

  const std::size_t first = *s.first_report();
  std::vector<double> out(days, *y[first]);
  std::size_t anchor = first;  // last reported day
  for (std::size_t t = first + 1; t < days; ++t) {
    if (y[t]) {
      out[t] = *y[t];
      anchor = t;
      continue;
    }
    double increment = 0.0;
    switch (kind) {
      case ModelKind::zero: break;
      case ModelKind::mean: increment = mean_increment; break;
      case ModelKind::modified_mean:
        increment = (anchor >= 1 && imputed[anchor] - imputed[anchor - 1] == 0.0) ? 0.0 : mean_increment;
        break;
      case ModelKind::linreg_locf:
        increment = linreg.b1 + linreg.b2 * out[t - 1] + linreg.b3 * z[t - 1];
        break;
      case ModelKind::increment: throw UsageError("not a benchmark");
    }
    out[t] = out[t - 1] + increment;
  }
  return out;
}

std::vector<double> bridge_increment(const HospitalSeries& s, const Beta& beta) {
  const Trajectory traj = predict_trajectory(s, beta);
  const std::size_t first = *s.first_report();
  std::vector<double> out(s.days(), *s.cases()[first]);
  for (std::size_t t = first; t < s.days(); ++t) out[t] = *traj.y_tilde[t];
  return out;
}

}  // namespace

std::vector<std::vector<double>> reconstruct_cohort(const Cohort& cohort, const ModelSpec& model,
                                                    std::size_t threads, std::size_t* fallbacks) {
  std::vector<std::vector<double>> out(cohort.size());
  if (fallbacks) *fallbacks = 0;
  if (model.kind != ModelKind::increment) {
    parallel_for(cohort.size(), threads,
                 [&](std::size_t k) { out[k] = bridge_benchmark(cohort[k], model.kind); });
    return out;
  }
  SharingOptions options;
  options.threads = threads;
  const CohortFit fitted = fit_shared(cohort, model.sharing, model.fit, options);
  std::size_t fell_back = 0;
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    if (fitted.fitted(k) && fitted.fits[k].converged) {
      out[k] = bridge_increment(cohort[k], fitted.fits[k].beta);
    } else {
      out[k] = bridge_benchmark(cohort[k], ModelKind::mean);
      ++fell_back;
    }
  }
  if (fallbacks) *fallbacks = fell_back;
  return out;
}

const RecoveryRow& RecoveryReport::row(double rate, const std::string& model) const {
  for (const auto& r : rows) {
    if (r.rate == rate && r.model == model) return r;
  }
  throw UsageError("no recovery row for model " + model);
}

RecoveryReport censor_and_recover(const Cohort& complete, const CensorSpec& spec,
                                  std::span<const ModelSpec> models, std::size_t threads) {
  if (complete.empty()) throw UsageError("empty cohort");
  if (spec.repetitions < 1) throw UsageError("at least one repetition is required");
  for (const auto& s : complete) {
    if (!s.fully_reported()) {
      throw UsageError("hospital " + s.id() + " is not fully reported");
    }
  }
  // Validate every rate against every length before doing any work.
  for (double rate : spec.rates) {
    for (const auto& s : complete) (void)censor_mask(s.days(), rate, 0);
  }

  RecoveryReport report;
  const auto reps = static_cast<double>(spec.repetitions);
  for (std::size_t ri = 0; ri < spec.rates.size(); ++ri) {
    const double rate = spec.rates[ri];
    std::vector<RecoveryRow> rows(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
      rows[m].rate = rate;
      rows[m].model = models[m].label();
      rows[m].per_hospital.assign(complete.size(), 0.0);
    }
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep) {
      Cohort censored;
      censored.reserve(complete.size());
      for (std::size_t k = 0; k < complete.size(); ++k) {
        const auto keep = censor_mask(complete[k].days(), rate, derive_seed(spec.seed, {ri, rep, k}));
        censored.push_back(complete[k].censored(keep));
      }
      for (std::size_t m = 0; m < models.size(); ++m) {
        std::size_t fell_back = 0;
        const auto trajectories = reconstruct_cohort(censored, models[m], threads, &fell_back);
        rows[m].fallbacks += fell_back;
        for (std::size_t k = 0; k < complete.size(); ++k) {
          const auto& truth = complete[k].cases();
          double total = 0.0;
          for (std::size_t t = 0; t < truth.size(); ++t) {
            const double d = trajectories[k][t] - *truth[t];
            total += d * d;
          }
          rows[m].per_hospital[k] += total / static_cast<double>(truth.size()) / reps;
        }
      }
    }
    for (auto& r : rows) {
      r.summary = summarize(r.per_hospital);
      report.rows.push_back(std::move(r));
    }
  }
  return report;
}

}  // namespace gapfit
