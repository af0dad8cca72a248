#include "gapfit/evaluation.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "gapfit/errors.hpp"
#include "gapfit/increment_model.hpp"
#include "gapfit/parallel.hpp"

namespace gapfit {

ModelSpec ModelSpec::benchmark(BenchmarkKind kind) {
  ModelSpec m;
  switch (kind) {
    case BenchmarkKind::zero: m.kind = ModelKind::zero; break;
    case BenchmarkKind::mean: m.kind = ModelKind::mean; break;
    case BenchmarkKind::modified_mean: m.kind = ModelKind::modified_mean; break;
    case BenchmarkKind::linreg_locf: m.kind = ModelKind::linreg_locf; break;
  }
  return m;
}

ModelSpec ModelSpec::increment(const SharingSpec& sharing, const FitConfig& fit) {
  ModelSpec m;
  m.kind = ModelKind::increment;
  m.sharing = sharing;
  m.fit = fit;
  return m;
}

std::string ModelSpec::label() const {
  switch (kind) {
    case ModelKind::zero: return "zero";
    case ModelKind::mean: return "mean";
    case ModelKind::modified_mean: return "modified_mean";
    case ModelKind::linreg_locf: return "linreg_locf";
    case ModelKind::increment: return "increment[" + sharing.label() + "]";
  }
  return "unknown";
}

namespace {

double last_imputed(const HospitalSeries& series) {
  const auto& y = series.cases();
  return locf_impute(std::span(y.data(), y.size() - 1)).back();
}

PointOutcome benchmark_point(const HospitalSeries& series, ModelKind kind) {
  PointOutcome out;
  try {
    PointPrediction p;
    p.anchor = last_imputed(series);
    switch (kind) {
      case ModelKind::zero: p.increment = predict_zero(series); break;
      case ModelKind::mean: p.increment = predict_mean(series); break;
      case ModelKind::modified_mean: p.increment = predict_modified_mean(series); break;
      case ModelKind::linreg_locf: {
        const HospitalSeries history = series.truncated(series.days() - 1);
        const Beta b = fit_linreg_locf(history).beta;
        const std::vector<double> y = locf_impute(history.cases());
        p.increment = b.b1 + b.b2 * y.back() + b.b3 * history.incidence().back();
        break;
      }
      case ModelKind::increment: throw UsageError("not a benchmark");
    }
    out.prediction = p;
  } catch (const InsufficientDataError& e) {
    out.failure = e.what();
  } catch (const UsageError& e) {
    out.failure = e.what();
  }
  return out;
}

}  // namespace

std::vector<PointOutcome> predict_last_points(const Cohort& cohort, const ModelSpec& model,
                                              std::size_t threads) {
  std::vector<PointOutcome> out(cohort.size());
  if (model.kind != ModelKind::increment) {
    parallel_for(cohort.size(), threads,
                 [&](std::size_t k) { out[k] = benchmark_point(cohort[k], model.kind); });
    return out;
  }

  // Hospitals too short to withhold a day cannot enter the joint fit.
  Cohort histories;
  std::vector<std::size_t> index;
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    if (cohort[k].days() < 3) {
      out[k].failure = "series " + cohort[k].id() + " is too short to withhold a day";
      continue;
    }
    histories.push_back(cohort[k].truncated(cohort[k].days() - 1));
    index.push_back(k);
  }
  SharingOptions options;
  options.threads = threads;
  const CohortFit fitted = fit_shared(histories, model.sharing, model.fit, options);
  for (std::size_t i = 0; i < index.size(); ++i) {
    PointOutcome& o = out[index[i]];
    if (!fitted.fitted(i)) {
      o.failure = fitted.failures[i];
      continue;
    }
    if (!fitted.fits[i].converged) {
      o.diverged = true;
      o.failure = "fit diverged";
      continue;
    }
    const LastStep step = predict_last_step(cohort[index[i]], fitted.fits[i].beta);
    o.prediction = PointPrediction{step.anchor, step.increment};
  }
  return out;
}

EvalReport last_point_error(const Cohort& cohort, std::span<const PointOutcome> primary,
                            std::span<const PointOutcome> fallback, std::string model) {
  if (primary.size() != cohort.size() || (!fallback.empty() && fallback.size() != cohort.size())) {
    throw UsageError("last_point_error: outcome count does not match the cohort");
  }
  EvalReport report;
  report.model = std::move(model);
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    const HospitalSeries& s = cohort[k];
    const auto& y_last = s.cases().back();
    if (!y_last) {
      ++report.excluded_unreported;
      continue;
    }
    const PointOutcome* used = &primary[k];
    bool used_fallback = false;
    if (!used->usable()) {
      used_fallback = true;
      used = fallback.empty() ? nullptr : &fallback[k];
    }
    if (!used || !used->usable()) {
      report.failed.push_back(s.id());
      continue;
    }
    const double target = *y_last - used->prediction->anchor;
    const double residual = used->prediction->increment - target;
    report.entries.push_back({s.id(), residual * residual, used_fallback});
    if (used_fallback) ++report.fallback_count;
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const HospitalError& a, const HospitalError& b) { return a.id < b.id; });
  std::vector<double> errors;
  errors.reserve(report.entries.size());
  for (const auto& e : report.entries) errors.push_back(e.squared_error);
  report.summary = summarize(errors);
  return report;
}

EvalReport evaluate_model(const Cohort& cohort, const ModelSpec& model, std::size_t threads) {
  const std::vector<PointOutcome> primary = predict_last_points(cohort, model, threads);
  std::vector<PointOutcome> fallback;
  const bool needs_fallback =
      std::any_of(primary.begin(), primary.end(), [](const PointOutcome& o) { return !o.usable(); });
  if (needs_fallback) {
    fallback = predict_last_points(cohort, ModelSpec::benchmark(BenchmarkKind::mean), threads);
  }
  return last_point_error(cohort, primary, fallback, model.label());
}

std::vector<WindowSpec> sliding_windows(std::size_t days, std::size_t length) {
  if (length > days) {
    throw UsageError("window length " + std::to_string(length) + " exceeds series length " +
                     std::to_string(days));
  }
  if (length < 3) throw UsageError("window length must be at least 3");
  std::vector<WindowSpec> out;
  for (std::size_t start = 1; start + length - 1 <= days; ++start) out.push_back({start, length});
  return out;
}

Cohort window_cohort(const Cohort& cohort, const WindowSpec& window) {
  Cohort out;
  out.reserve(cohort.size());
  for (const auto& s : cohort) out.push_back(s.slice(window.start - 1, window.length));
  return out;
}

double SensitivityRow::fraction_nonnegative() const {
  if (improvement.empty()) return 0.0;
  const auto n = std::count_if(improvement.begin(), improvement.end(), [](double d) { return d >= 0.0; });
  return static_cast<double>(n) / static_cast<double>(improvement.size());
}

namespace {

std::size_t common_length(const Cohort& cohort) {
  if (cohort.empty()) throw UsageError("empty cohort");
  const std::size_t days = cohort.front().days();
  for (const auto& s : cohort) {
    if (s.days() != days) throw UsageError("cohort series differ in length");
  }
  return days;
}

}  // namespace

SensitivityTable sensitivity_run(const Cohort& cohort, std::span<const ModelSpec> models,
                                 std::span<const ModelSpec> baselines, std::size_t window_length,
                                 std::size_t threads) {
  SensitivityTable table;
  table.windows = sliding_windows(common_length(cohort), window_length);

  // Distinct models evaluated once per window, keyed by label.
  std::map<std::string, const ModelSpec*> distinct;
  for (const auto& m : models) distinct.emplace(m.label(), &m);
  for (const auto& m : baselines) distinct.emplace(m.label(), &m);

  std::map<std::string, std::vector<double>> sums;
  std::map<std::string, std::size_t> fallbacks;
  for (const auto& w : table.windows) {
    const Cohort sub = window_cohort(cohort, w);
    for (const auto& [label, spec] : distinct) {
      const EvalReport r = evaluate_model(sub, *spec, threads);
      sums[label].push_back(r.summary.sum);
      fallbacks[label] += r.fallback_count;
    }
  }

  for (const auto& b : baselines) {
    const std::vector<double>& base = sums.at(b.label());
    for (const auto& m : models) {
      SensitivityRow row;
      row.baseline = b.label();
      row.model = m.label();
      const std::vector<double>& own = sums.at(m.label());
      row.improvement.resize(base.size());
      for (std::size_t w = 0; w < base.size(); ++w) row.improvement[w] = base[w] - own[w];
      row.q1 = quantile(row.improvement, 0.25);
      row.median = quantile(row.improvement, 0.5);
      row.q3 = quantile(row.improvement, 0.75);
      row.fallback_total = fallbacks.at(m.label());
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

}  // namespace gapfit
