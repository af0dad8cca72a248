#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <variant>

#include <spdlog/spdlog.h>

#include "gapfit/autodiff.hpp"
#include "gapfit/benchmarks.hpp"
#include "gapfit/cohort_io.hpp"
#include "gapfit/evaluation.hpp"
#include "gapfit/increment_model.hpp"
#include "gapfit/random.hpp"
#include "gapfit/sharing.hpp"

#ifndef GAPFIT_VERSION
#define GAPFIT_VERSION "0.0.0"
#endif

namespace gapfit::cli {

using nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Tables written both as CSV and as JSON arrays of row objects.

using Cell = std::variant<std::monostate, std::string, double, long long, bool>;

Cell count(std::size_t n) { return static_cast<long long>(n); }

Cell real_or_empty(double v) {
  if (!std::isfinite(v)) return std::monostate{};
  return v;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch");
    rows.push_back(std::move(row));
  }

  std::string csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out += ',';
      out += quote_csv_field(columns[i]);
    }
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::string>) {
                out += quote_csv_field(v);
              } else if constexpr (std::is_same_v<T, double>) {
                out += format_real(v);
              } else if constexpr (std::is_same_v<T, long long>) {
                out += std::to_string(v);
              } else if constexpr (std::is_same_v<T, bool>) {
                out += v ? "true" : "false";
              }
            },
            row[i]);
      }
      out += '\n';
    }
    return out;
  }

  ordered_json json() const {
    ordered_json out = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::monostate>) {
                obj[columns[i]] = nullptr;
              } else {
                obj[columns[i]] = v;
              }
            },
            row[i]);
      }
      out.push_back(std::move(obj));
    }
    return out;
  }
};

// Collects written files and the inputs read, with their digests.
class RunFiles {
 public:
  explicit RunFiles(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    write_file(dir_ / name, content);
    artifacts_.push_back({name, digest(content)});
  }

  void write_json(const std::string& name, const ordered_json& doc) { write(name, doc.dump(2) + "\n"); }

  std::string read_input(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    std::string text = read_file(path);
    inputs_.push_back({path, digest(text)});
    return text;
  }

  const std::vector<FileRecord>& artifacts() const { return artifacts_; }
  const std::vector<FileRecord>& inputs() const { return inputs_; }

 private:
  std::filesystem::path dir_;
  std::vector<FileRecord> artifacts_;
  std::vector<FileRecord> inputs_;
};

// Positions of the cohort sorted by hospital id.
std::vector<std::size_t> by_id(const Cohort& cohort) {
  std::vector<std::size_t> order(cohort.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return cohort[a].id() < cohort[b].id(); });
  return order;
}

LoadedCohort load_input(const RunConfig& config, RunFiles& files) {
  LoadedCohort loaded = parse_cohort(files.read_input(config.input, "--input"), config.incidence_column);
  for (const auto& id : loaded.excluded) {
    spdlog::warn("hospital {} has fewer than 2 reports and is skipped", id);
  }
  if (loaded.cohort.empty()) throw InsufficientDataError("no hospital in " + config.input + " has 2 reports");
  spdlog::info("loaded {} hospitals from {}", loaded.cohort.size(), config.input);
  return loaded;
}

std::vector<ModelSpec> increment_models(const RunConfig& config) {
  std::vector<ModelSpec> out;
  if (config.all_sharing) {
    for (const auto& s : SharingSpec::all_combinations()) out.push_back(ModelSpec::increment(s, config.fit));
  } else {
    out.push_back(ModelSpec::increment(SharingSpec::parse(config.share), config.fit));
  }
  return out;
}

std::vector<ModelSpec> benchmark_models() {
  return {ModelSpec::benchmark(BenchmarkKind::zero), ModelSpec::benchmark(BenchmarkKind::mean),
          ModelSpec::benchmark(BenchmarkKind::modified_mean),
          ModelSpec::benchmark(BenchmarkKind::linreg_locf)};
}

std::string description(const ModelSpec& m) {
  return m.kind == ModelKind::increment ? m.sharing.describe() : std::string{};
}

void summary_cells(std::vector<Cell>& row, const Summary& s) {
  row.insert(row.end(), {s.sum, s.mean, s.q1, s.median, s.q3, count(s.count)});
}

const std::vector<std::string> kSummaryColumns = {"sum", "mean", "q1", "median", "q3", "n"};

std::vector<std::string> with_summary(std::vector<std::string> head, std::vector<std::string> tail = {}) {
  head.insert(head.end(), kSummaryColumns.begin(), kSummaryColumns.end());
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

void check_threads(const RunConfig& config) {
  if (config.threads < 1) throw UsageError("--threads must be at least 1");
}

// ---------------------------------------------------------------------------

struct Outcome {
  std::optional<std::string> failed_check;
};

Outcome cmd_simulate(const RunConfig& config, RunFiles& files) {
  SimSpec spec;
  spec.hospitals = config.hospitals;
  spec.days = config.days;
  spec.noise = config.noise;
  spec.missingness = config.missingness;
  spec.catchment_lo = config.catchment[0];
  spec.catchment_hi = config.catchment[1];
  spec.initial_cases_lo = config.initial_cases[0];
  spec.initial_cases_hi = config.initial_cases[1];
  spec.seed = config.seed;
  const SimulatedCohort sim = simulate_cohort(spec);

  files.write("cohort.csv", format_cohort(sim.cohort));
  files.write("truth.csv", format_truth(sim.truth));

  Table hospitals{{"hospital_id", "true_b1", "true_b2", "true_b3", "reports", "days"}, {}};
  std::size_t missing = 0;
  for (std::size_t k = 0; k < sim.cohort.size(); ++k) {
    const auto& s = sim.cohort[k];
    const Beta& b = sim.truth[k].beta;
    hospitals.add({s.id(), b.b1, b.b2, b.b3, count(s.report_count()), count(s.days())});
    missing += s.days() - s.report_count();
  }
  ordered_json doc;
  doc["command"] = "simulate";
  doc["missing_fraction"] = static_cast<double>(missing) / static_cast<double>(spec.hospitals * spec.days);
  doc["hospitals"] = hospitals.json();
  files.write_json("simulate.json", doc);
  spdlog::info("simulated {} hospitals over {} days", spec.hospitals, spec.days);
  return {};
}

Outcome cmd_fit(const RunConfig& config, RunFiles& files) {
  check_threads(config);
  const LoadedCohort loaded = load_input(config, files);
  const SharingSpec sharing = SharingSpec::parse(config.share);
  SharingOptions options;
  options.threads = config.threads;
  const CohortFit fitted = fit_shared(loaded.cohort, sharing, config.fit, options);

  struct Row {
    std::string id;
    std::optional<std::size_t> index;
  };
  std::vector<Row> rows;
  for (std::size_t k = 0; k < loaded.cohort.size(); ++k) rows.push_back({loaded.cohort[k].id(), k});
  for (const auto& id : loaded.excluded) rows.push_back({id, std::nullopt});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });

  Table params{{"hospital_id", "b1", "b2", "b3", "converged", "fell_back", "steps_used", "final_loss", "status"},
               {}};
  Table traces{{"hospital_id", "step", "loss"}, {}};
  ordered_json trace_doc = ordered_json::object();
  std::size_t diverged = 0;
  for (const auto& row : rows) {
    if (!row.index) {
      params.add({row.id, {}, {}, {}, false, true, count(0), {}, "excluded: fewer than 2 reports"});
      continue;
    }
    const std::size_t k = *row.index;
    if (!fitted.fitted(k)) {
      params.add({row.id, {}, {}, {}, false, true, count(0), {}, "excluded: " + fitted.failures[k]});
      continue;
    }
    const FitResult& r = fitted.fits[k];
    if (!r.converged) ++diverged;
    params.add({row.id, real_or_empty(r.beta.b1), real_or_empty(r.beta.b2), real_or_empty(r.beta.b3), r.converged,
                r.fell_back, count(r.steps_used), real_or_empty(r.loss_trace.back()),
                r.converged ? "ok" : "diverged"});
    ordered_json losses = ordered_json::array();
    for (std::size_t s = 0; s < r.loss_trace.size(); ++s) {
      traces.add({row.id, count(s), real_or_empty(r.loss_trace[s])});
      losses.push_back(std::isfinite(r.loss_trace[s]) ? ordered_json(r.loss_trace[s]) : ordered_json(nullptr));
    }
    trace_doc[row.id] = std::move(losses);
  }
  if (diverged > 0) spdlog::warn("{} hospitals diverged and are marked fell_back", diverged);

  files.write("parameters.csv", params.csv());
  files.write("loss_traces.csv", traces.csv());
  ordered_json doc;
  doc["command"] = "fit";
  doc["share"] = sharing.label();
  doc["description"] = sharing.describe();
  doc["parameters"] = params.json();
  doc["loss_traces"] = std::move(trace_doc);
  files.write_json("fit.json", doc);
  return {};
}

// Perfect-knowledge predictor from the truth sidecar: anchor and increment
// are the true states of days T-1 and T.
std::vector<PointOutcome> truth_outcomes(const Cohort& cohort, const std::vector<GroundTruth>& truth) {
  std::map<std::string, const GroundTruth*> index;
  for (const auto& g : truth) index.emplace(g.id, &g);
  std::vector<PointOutcome> out(cohort.size());
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    const auto it = index.find(cohort[k].id());
    if (it == index.end()) throw UsageError("truth file has no hospital " + cohort[k].id());
    const auto& y = it->second->cases;
    if (y.size() != cohort[k].days()) throw UsageError("truth length differs for " + cohort[k].id());
    const std::size_t last = y.size() - 1;
    out[k].prediction = PointPrediction{y[last - 1], y[last] - y[last - 1]};
  }
  return out;
}

Outcome cmd_benchmark(const RunConfig& config, RunFiles& files) {
  check_threads(config);
  const LoadedCohort loaded = load_input(config, files);
  std::vector<ModelSpec> models = increment_models(config);
  for (auto& m : benchmark_models()) models.push_back(std::move(m));

  std::vector<EvalReport> reports;
  std::vector<std::string> descriptions;
  for (const auto& m : models) {
    spdlog::info("evaluating {}", m.label());
    reports.push_back(evaluate_model(loaded.cohort, m, config.threads));
    descriptions.push_back(description(m));
  }
  if (!config.truth.empty()) {
    const auto truth = parse_truth(files.read_input(config.truth, "--truth"));
    reports.push_back(last_point_error(loaded.cohort, truth_outcomes(loaded.cohort, truth), {}, "truth"));
    descriptions.emplace_back("true trajectory");
  }

  Table table{with_summary({"model", "description"}, {"fallbacks", "unreported_last_day", "failed"}), {}};
  Table errors{{"model", "hospital_id", "squared_error", "used_fallback"}, {}};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const EvalReport& r = reports[i];
    std::vector<Cell> row{r.model, descriptions[i]};
    summary_cells(row, r.summary);
    row.insert(row.end(), {count(r.fallback_count), count(r.excluded_unreported), count(r.failed.size())});
    table.add(std::move(row));
    for (const auto& e : r.entries) errors.add({r.model, e.id, e.squared_error, e.used_fallback});
  }
  files.write("benchmark.csv", table.csv());
  files.write("errors.csv", errors.csv());
  ordered_json doc;
  doc["command"] = "benchmark";
  doc["models"] = table.json();
  doc["errors"] = errors.json();
  files.write_json("benchmark.json", doc);
  return {};
}

Outcome cmd_sensitivity(const RunConfig& config, RunFiles& files) {
  check_threads(config);
  const LoadedCohort loaded = load_input(config, files);
  const std::vector<ModelSpec> models = increment_models(config);
  std::vector<ModelSpec> baselines;
  for (const auto& name : config.baselines) {
    if (name == "increment") {
      baselines.push_back(ModelSpec::increment(SharingSpec::parse(config.share), config.fit));
    } else {
      baselines.push_back(ModelSpec::benchmark(parse_benchmark(name)));
    }
  }
  if (baselines.empty()) throw UsageError("at least one baseline is required");

  const SensitivityTable result =
      sensitivity_run(loaded.cohort, models, baselines, config.window_len, config.threads);

  Table windows{{"window", "start", "end"}, {}};
  for (std::size_t w = 0; w < result.windows.size(); ++w) {
    windows.add({count(w + 1), count(result.windows[w].start), count(result.windows[w].last())});
  }
  std::map<std::string, std::string> described;
  for (const auto& m : models) described[m.label()] = description(m);

  Table table{{"baseline", "model", "description", "q1", "median", "q3", "fraction_nonnegative", "fallbacks"}, {}};
  Table improvements{{"baseline", "model", "window", "start", "improvement"}, {}};
  for (const auto& row : result.rows) {
    table.add({row.baseline, row.model, described[row.model], row.q1, row.median, row.q3,
               row.fraction_nonnegative(), count(row.fallback_total)});
    for (std::size_t w = 0; w < row.improvement.size(); ++w) {
      improvements.add({row.baseline, row.model, count(w + 1), count(result.windows[w].start), row.improvement[w]});
    }
  }
  files.write("windows.csv", windows.csv());
  files.write("sensitivity.csv", table.csv());
  files.write("improvements.csv", improvements.csv());
  ordered_json doc;
  doc["command"] = "sensitivity";
  doc["window_length"] = config.window_len;
  doc["windows"] = windows.json();
  doc["quantiles"] = table.json();
  doc["improvements"] = improvements.json();
  files.write_json("sensitivity.json", doc);
  return {};
}

Outcome cmd_censor(const RunConfig& config, RunFiles& files) {
  check_threads(config);
  const LoadedCohort loaded = load_input(config, files);
  if (!loaded.excluded.empty()) throw UsageError("censoring needs a fully reported cohort");
  std::vector<ModelSpec> models = benchmark_models();
  for (auto& m : increment_models(config)) models.push_back(std::move(m));
  CensorSpec spec;
  spec.rates = config.rates;
  spec.repetitions = config.reps;
  spec.seed = config.seed;
  const RecoveryReport report = censor_and_recover(loaded.cohort, spec, models, config.threads);

  const auto order = by_id(loaded.cohort);
  Table table{with_summary({"rate", "model"}, {"fallbacks"}), {}};
  Table per_hospital{{"rate", "model", "hospital_id", "error"}, {}};
  for (const auto& row : report.rows) {
    std::vector<Cell> cells{row.rate, row.model};
    summary_cells(cells, row.summary);
    cells.push_back(count(row.fallbacks));
    table.add(std::move(cells));
    for (std::size_t k : order) per_hospital.add({row.rate, row.model, loaded.cohort[k].id(), row.per_hospital[k]});
  }
  files.write("recovery.csv", table.csv());
  files.write("recovery_hospitals.csv", per_hospital.csv());
  ordered_json doc;
  doc["command"] = "censor";
  doc["repetitions"] = config.reps;
  doc["summary"] = table.json();
  doc["hospitals"] = per_hospital.json();
  files.write_json("censor.json", doc);
  return {};
}

// A random series with gaps and a random coefficient vector.
struct GradInstance {
  HospitalSeries series;
  std::array<double, 3> beta;
};

GradInstance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t days = 4 + static_cast<std::size_t>(rng.below(37));
  std::vector<std::optional<double>> cases(days);
  std::vector<double> z(days);
  double level = rng.uniform(0.0, 20.0);
  for (std::size_t t = 0; t < days; ++t) {
    level = std::max(0.0, level + rng.uniform(-2.0, 2.0));
    z[t] = rng.uniform(0.0, 50.0);
    if (t == 0 || t == days - 1 || !rng.bernoulli(0.3)) cases[t] = level;
  }
  return {HospitalSeries("G" + std::to_string(seed), std::move(cases), std::move(z)),
          {rng.uniform(-1.0, 1.0), rng.uniform(-0.5, 0.2), rng.uniform(-0.05, 0.05)}};
}

Outcome cmd_gradcheck(const RunConfig& config, RunFiles& files) {
  if (config.trials == 0) throw UsageError("--trials must be at least 1");
  if (!(config.tolerance > 0.0)) throw UsageError("--tolerance must be positive");
  Table table{{"trial", "days", "reports", "max_relative_error", "pass"}, {}};
  std::size_t failures = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < config.trials; ++t) {
    const GradInstance inst = random_instance(derive_seed(config.seed, {t}));
    const auto f = [&](std::span<const DiffScalar> x) {
      return loss(inst.series, std::array<DiffScalar, 3>{x[0], x[1], x[2]});
    };
    const double err = check_gradient(f, inst.beta, 1e-6);
    const bool pass = err <= config.tolerance;
    failures += pass ? 0 : 1;
    worst = std::max(worst, err);
    table.add({count(t), count(inst.series.days()), count(inst.series.report_count()), err, pass});
  }
  files.write("gradcheck.csv", table.csv());
  ordered_json doc;
  doc["command"] = "gradcheck";
  doc["trials"] = config.trials;
  doc["failures"] = failures;
  doc["worst_relative_error"] = worst;
  doc["tolerance"] = config.tolerance;
  files.write_json("gradcheck.json", doc);
  spdlog::info("gradcheck: {} of {} trials within {}", config.trials - failures, config.trials, config.tolerance);
  Outcome out;
  if (failures > 0) {
    out.failed_check = std::to_string(failures) + " of " + std::to_string(config.trials) +
                       " gradient checks exceeded tolerance (worst " + format_real(worst) + ")";
  }
  return out;
}

std::map<std::string, Beta> parse_params(const std::string& text) {
  const auto lines = [&] {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      out.push_back(text.substr(pos, end - pos));
      pos = end + 1;
    }
    return out;
  }();
  if (lines.empty()) throw ParseError(1, "missing header");
  const auto header = split_csv_line(lines.front());
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id = col("hospital_id");
  const std::size_t cols[3] = {col("b1"), col("b2"), col("b3")};
  std::map<std::string, Beta> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) throw ParseError(i + 1, "wrong number of cells");
    if (cells[cols[0]].empty() || cells[cols[1]].empty() || cells[cols[2]].empty()) continue;
    Beta b;
    for (std::size_t j = 0; j < 3; ++j) b[j] = parse_real(cells[cols[j]], i + 1);
    out[cells[id]] = b;
  }
  return out;
}

std::map<std::string, std::vector<double>> parse_future(const std::string& text, const Cohort& cohort,
                                                        const std::string& column) {
  const std::size_t header_end = text.find('\n');
  if (header_end == std::string::npos) throw ParseError(1, "missing header");
  const auto header = split_csv_line(text.substr(0, header_end));
  auto col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(1, "missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = col("hospital_id");
  const std::size_t day_col = col("day");
  const std::size_t z_col = col(column);
  std::map<std::string, std::size_t> days;
  for (const auto& s : cohort) days[s.id()] = s.days();

  std::map<std::string, std::map<std::size_t, double>> rows;
  std::size_t pos = header_end + 1;
  for (std::size_t line = 2; pos < text.size(); ++line) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string row = text.substr(pos, end - pos);
    pos = end + 1;
    if (row.empty()) continue;
    const auto cells = split_csv_line(row);
    if (cells.size() != header.size()) throw ParseError(line, "wrong number of cells");
    const double day = parse_real(cells[day_col], line);
    const double z = parse_real(cells[z_col], line);
    if (z < 0.0) throw ParseError(line, "negative " + column);
    rows[cells[id_col]][static_cast<std::size_t>(day)] = z;
  }
  std::map<std::string, std::vector<double>> out;
  for (const auto& [id, by_day] : rows) {
    const auto it = days.find(id);
    if (it == days.end()) continue;
    std::vector<double> values;
    for (std::size_t d = it->second + 1; by_day.count(d); ++d) values.push_back(by_day.at(d));
    out[id] = std::move(values);
  }
  return out;
}

Outcome cmd_predict(const RunConfig& config, RunFiles& files) {
  const LoadedCohort loaded = load_input(config, files);
  const auto params = parse_params(files.read_input(config.params, "--params"));
  std::map<std::string, std::vector<double>> future;
  if (config.horizon > 0) {
    if (config.future.empty()) throw UsageError("--horizon > 0 needs --future incidence for days after T");
    future = parse_future(files.read_input(config.future, "--future"), loaded.cohort, config.incidence_column);
  }

  Table table{{"hospital_id", "day", "observed", "y_tilde", "dy_hat", "segment"}, {}};
  for (std::size_t k : by_id(loaded.cohort)) {
    const HospitalSeries& s = loaded.cohort[k];
    const auto p = params.find(s.id());
    if (p == params.end()) {
      spdlog::warn("no parameters for hospital {}; skipped", s.id());
      continue;
    }
    const Trajectory traj = predict_trajectory(s, p->second);
    for (std::size_t t = 0; t < s.days(); ++t) {
      const auto& y = s.cases()[t];
      const char* segment = !traj.y_tilde[t] ? "before_first_report" : (y ? "observed" : "bridged");
      table.add({s.id(), count(t + 1), y ? Cell(*y) : Cell(), traj.y_tilde[t] ? Cell(*traj.y_tilde[t]) : Cell(),
                 traj.dy_hat[t] ? Cell(*traj.dy_hat[t]) : Cell(), segment});
    }
    if (config.horizon == 0) continue;
    const std::vector<double> z = future.count(s.id()) ? future.at(s.id()) : std::vector<double>{};
    if (z.size() + 1 < config.horizon) {
      throw UsageError("hospital " + s.id() + " needs " + std::to_string(config.horizon - 1) +
                       " future incidence values, found " + std::to_string(z.size()));
    }
    const std::vector<double> levels = forecast(s, p->second, z, config.horizon);
    double previous = *traj.y_tilde.back();
    for (std::size_t h = 0; h < levels.size(); ++h) {
      table.add({s.id(), count(s.days() + h + 1), {}, levels[h], levels[h] - previous, "forecast"});
      previous = levels[h];
    }
  }
  files.write("trajectory.csv", table.csv());
  ordered_json doc;
  doc["command"] = "predict";
  doc["horizon"] = config.horizon;
  doc["trajectory"] = table.json();
  files.write_json("predict.json", doc);
  return {};
}

Outcome dispatch(const RunConfig& config, RunFiles& files) {
  if (config.command == "simulate") return cmd_simulate(config, files);
  if (config.command == "fit") return cmd_fit(config, files);
  if (config.command == "benchmark") return cmd_benchmark(config, files);
  if (config.command == "sensitivity") return cmd_sensitivity(config, files);
  if (config.command == "censor") return cmd_censor(config, files);
  if (config.command == "gradcheck") return cmd_gradcheck(config, files);
  if (config.command == "predict") return cmd_predict(config, files);
  throw UsageError("unknown command '" + config.command + "'");
}

}  // namespace

Manifest execute(const RunConfig& config, const std::filesystem::path& output_dir) {
  (void)config_keys(config.command);
  RunFiles files(output_dir);
  const Outcome outcome = dispatch(config, files);

  Manifest manifest;
  manifest.version = GAPFIT_VERSION;
  manifest.command = config.command;
  manifest.seed = config.seed;
  manifest.config = config_to_json(config);
  manifest.inputs = files.inputs();
  manifest.artifacts = files.artifacts();
  save_manifest(output_dir / "manifest.json", manifest);
  spdlog::info("wrote {} artifacts to {}", manifest.artifacts.size(), output_dir.string());
  if (outcome.failed_check) throw CheckFailed(*outcome.failed_check);
  return manifest;
}

Manifest replay(const std::filesystem::path& manifest_path, const std::filesystem::path& output_dir) {
  const Manifest recorded = load_manifest(manifest_path);
  for (const auto& input : recorded.inputs) {
    if (digest(read_file(input.path)) != input.fnv1a64) {
      throw UsageError("input " + input.path + " changed since the recorded run");
    }
  }
  const RunConfig config = config_from_json(recorded.command, recorded.config);
  const Manifest produced = execute(config, output_dir);
  if (produced.artifacts != recorded.artifacts) {
    std::string detail;
    for (const auto& a : recorded.artifacts) {
      const auto it = std::find_if(produced.artifacts.begin(), produced.artifacts.end(),
                                   [&](const FileRecord& p) { return p.path == a.path; });
      if (it == produced.artifacts.end() || it->fnv1a64 != a.fnv1a64) detail += " " + a.path;
    }
    throw CheckFailed("replay differs from the recorded run:" + (detail.empty() ? std::string(" artifact list") : detail));
  }
  return produced;
}

}  // namespace gapfit::cli
