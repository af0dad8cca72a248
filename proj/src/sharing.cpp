#include "gapfit/sharing.hpp"

#include <algorithm>
#include <sstream>

#include "gapfit/errors.hpp"
#include "gapfit/parallel.hpp"

namespace gapfit {

SharingSpec SharingSpec::parse(const std::string& text) {
  SharingSpec spec;
  if (text == "none" || text.empty()) return spec;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    if (token == "b1") {
      spec.shared[0] = true;
    } else if (token == "b2") {
      spec.shared[1] = true;
    } else if (token == "b3") {
      spec.shared[2] = true;
    } else {
      throw UsageError("unknown shared coefficient '" + token + "' (expected b1, b2, b3 or none)");
    }
  }
  return spec;
}

std::vector<SharingSpec> SharingSpec::all_combinations() {
  return {
      {{true, true, false}},  {{false, true, false}}, {{true, true, true}},
      {{false, true, true}},  {{true, false, true}},  {{false, false, true}},
      {{true, false, false}}, {{false, false, false}},
  };
}

std::string SharingSpec::label() const {
  std::string out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (!shared[i]) continue;
    if (!out.empty()) out += ',';
    out += "b" + std::to_string(i + 1);
  }
  return out.empty() ? "none" : out;
}

std::string SharingSpec::describe() const {
  std::string out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (i) out += "; ";
    out += shared[i] ? "global b" : "individual b";
    out += std::to_string(i + 1);
  }
  return out;
}

double order_free_mean(std::span<const double> values) {
  if (values.empty()) throw UsageError("mean of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double anchor = sorted.front();
  double offset = 0.0;
  for (double v : sorted) offset += v - anchor;
  return anchor + offset / static_cast<double>(sorted.size());
}

CohortFit fit_shared(const Cohort& cohort, const SharingSpec& spec, const FitConfig& config,
                     const SharingOptions& options) {
  config.validate();
  const std::size_t k_total = cohort.size();
  CohortFit out;
  out.fits.resize(k_total);
  out.failures.resize(k_total);

  FitConfig run_config = config;
  // Early stopping would desynchronize the shared steps.
  if (spec.any()) run_config.gradient_tolerance = 0.0;

  std::vector<std::optional<FitState>> states(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    try {
      states[k].emplace(cohort[k], run_config);
    } catch (const InsufficientDataError& e) {
      out.failures[k] = e.what();
      out.fits[k].beta = config.init;
      out.fits[k].fell_back = true;
    }
  }

  if (!spec.any()) {
    parallel_for(k_total, options.threads, [&](std::size_t k) {
      if (!states[k]) return;
      for (std::size_t s = 0; s < run_config.steps; ++s) {
        if (!states[k]->step()) break;
      }
      states[k]->finish();
      out.fits[k] = states[k]->result();
    });
    return out;
  }

  std::vector<double> column;
  std::vector<Beta> snapshot;
  for (std::size_t s = 0; s < run_config.steps; ++s) {
    parallel_for(k_total, options.threads, [&](std::size_t k) {
      if (states[k] && states[k]->active()) states[k]->step();
    });
    for (std::size_t j = 0; j < 3; ++j) {
      if (!spec.shared[j]) continue;
      column.clear();
      for (const auto& st : states) {
        if (st && st->active()) column.push_back(st->parameter(j));
      }
      if (column.empty()) continue;
      const double mean = order_free_mean(column);
      for (auto& st : states) {
        if (st && st->active()) st->set_parameter(j, mean);
      }
      out.mean_trace[j].push_back(j == 2 ? mean * config.incidence_scale : mean);
    }
    if (options.on_step) {
      snapshot.assign(k_total, config.init);
      for (std::size_t k = 0; k < k_total; ++k) {
        if (states[k]) snapshot[k] = states[k]->beta();
      }
      options.on_step(s, snapshot);
    }
    bool any_active = false;
    for (const auto& st : states) any_active = any_active || (st && st->active());
    if (!any_active) break;
  }
  for (std::size_t k = 0; k < k_total; ++k) {
    if (!states[k]) continue;
    states[k]->finish();
    out.fits[k] = states[k]->result();
  }
  return out;
}

}  // namespace gapfit
