#pragma once

// Evaluation protocols: withheld-last-day squared error over a cohort,
// sliding-window sensitivity, and censor-and-recover validation.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gapfit/benchmarks.hpp"
#include "gapfit/optimizer.hpp"
#include "gapfit/series.hpp"
#include "gapfit/sharing.hpp"
#include "gapfit/stats.hpp"

namespace gapfit {

enum class ModelKind { zero, mean, modified_mean, linreg_locf, increment };

struct ModelSpec {
  ModelKind kind = ModelKind::increment;
  SharingSpec sharing{};
  FitConfig fit{};

  static ModelSpec benchmark(BenchmarkKind kind);
  static ModelSpec increment(const SharingSpec& sharing, const FitConfig& fit);

  // "zero", "mean", "modified_mean", "linreg_locf", or "increment[<share>]".
  std::string label() const;
};

// Predicted level change into day T: the model's own state on day T-1 and
// its predicted increment.
struct PointPrediction {
  double anchor = 0.0;
  double increment = 0.0;
};

struct PointOutcome {
  std::optional<PointPrediction> prediction;
  // The fit ran but diverged; prediction is empty.
  bool diverged = false;
  std::string failure;

  bool usable() const { return prediction.has_value(); }
};

// Fits on days 1..T-1 of every hospital and predicts day T.
std::vector<PointOutcome> predict_last_points(const Cohort& cohort, const ModelSpec& model,
                                              std::size_t threads = 1);

struct HospitalError {
  std::string id;
  double squared_error = 0.0;
  bool used_fallback = false;
};

struct EvalReport {
  std::string model;
  // Hospitals reported on day T, sorted by id.
  std::vector<HospitalError> entries;
  Summary summary;
  std::size_t fallback_count = 0;
  // Hospitals not reported on day T.
  std::size_t excluded_unreported = 0;
  // Reported on day T but neither the model nor the fallback could predict.
  std::vector<std::string> failed;

  bool empty() const { return entries.empty(); }
};

// Squared error (increment - (y_T - anchor))^2 for each hospital with a
// day-T report. Hospitals whose primary outcome is unusable take the
// fallback outcome and count toward fallback_count.
EvalReport last_point_error(const Cohort& cohort, std::span<const PointOutcome> primary,
                            std::span<const PointOutcome> fallback, std::string model);

// predict_last_points for the model (and the mean model as fallback)
// followed by last_point_error.
EvalReport evaluate_model(const Cohort& cohort, const ModelSpec& model, std::size_t threads = 1);

struct WindowSpec {
  std::size_t start = 1;  // 1-based first day
  std::size_t length = 35;

  std::size_t last() const { return start + length - 1; }
  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

// All T - length + 1 windows in order of start. Throws UsageError when
// length > T or length < 3.
std::vector<WindowSpec> sliding_windows(std::size_t days, std::size_t length);

Cohort window_cohort(const Cohort& cohort, const WindowSpec& window);

struct SensitivityRow {
  std::string baseline;
  std::string model;
  // baseline error sum - model error sum, one entry per window; larger is
  // better for the model.
  std::vector<double> improvement;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  std::size_t fallback_total = 0;

  double fraction_nonnegative() const;
};

struct SensitivityTable {
  std::vector<WindowSpec> windows;
  std::vector<SensitivityRow> rows;  // baseline-major, then model order
};

// Throws UsageError when the cohort members differ in length or the window
// does not fit.
SensitivityTable sensitivity_run(const Cohort& cohort, std::span<const ModelSpec> models,
                                 std::span<const ModelSpec> baselines, std::size_t window_length,
                                 std::size_t threads = 1);

struct CensorSpec {
  std::vector<double> rates{0.10, 0.25, 0.50, 0.75};
  std::size_t repetitions = 10;
  std::uint64_t seed = 0;
};

// Keeps day 1 and censors round(rate * days) of the remaining days chosen
// uniformly at random. Throws UsageError unless 0 < rate < 1 and at least
// 2 reports remain.
std::vector<std::uint8_t> censor_mask(std::size_t days, double rate, std::uint64_t seed);

// Full-length reconstruction of every hospital's trajectory. Benchmarks
// work on the LOCF-imputed series and bridge gaps with their own increment
// rule; the increment model bridges with its fitted recursion and falls
// back to the mean rule when its fit diverged. `fallbacks` (optional)
// receives the number of fallbacks.
std::vector<std::vector<double>> reconstruct_cohort(const Cohort& cohort, const ModelSpec& model,
                                                    std::size_t threads = 1,
                                                    std::size_t* fallbacks = nullptr);

struct RecoveryRow {
  double rate = 0.0;
  std::string model;
  // Per hospital: squared reconstruction error averaged over days and
  // repetitions, in cohort order.
  std::vector<double> per_hospital;
  Summary summary;
  std::size_t fallbacks = 0;
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;  // rate-major, then model order

  const RecoveryRow& row(double rate, const std::string& model) const;
};

// Throws UsageError when a hospital is not fully reported or a rate would
// leave fewer than 2 reports.
RecoveryReport censor_and_recover(const Cohort& complete, const CensorSpec& spec,
                                  std::span<const ModelSpec> models, std::size_t threads = 1);

}  // namespace gapfit
