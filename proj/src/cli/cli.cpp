#include "gapfit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "gapfit/cohort_io.hpp"
#include "gapfit/errors.hpp"

#ifndef GAPFIT_VERSION
#define GAPFIT_VERSION "0.0.0"
#endif

namespace gapfit::cli {

namespace {

void configure_logging() {
  static bool done = false;
  if (!done) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("gapfit"));
    spdlog::set_pattern("[%l] %v");
    done = true;
  }
  const char* env = std::getenv("GAPFIT_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

// Values the flags parse into before they are checked and copied into the
// RunConfig.
struct FlagText {
  std::vector<double> eta;
  std::vector<double> init;
  std::vector<double> catchment;
  std::vector<double> initial_cases;
  std::string method = "gd";
  std::string spec;
  std::string manifest;
  std::string output_dir = "gapfit_out";
};

std::array<double, 3> triple(const std::vector<double>& v, const char* flag) {
  if (v.size() != 3) throw UsageError(std::string(flag) + " needs three comma-separated values");
  return {v[0], v[1], v[2]};
}

std::array<double, 2> pair(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) throw UsageError(std::string(flag) + " needs lo,hi");
  return {v[0], v[1]};
}

void add_output(CLI::App* sub, FlagText& text) {
  sub->add_option("--output-dir,-o", text.output_dir, "Directory for reports and manifest.json")
      ->capture_default_str();
}

void add_input(CLI::App* sub, RunConfig& c) {
  sub->add_option("--input,-i", c.input, "Cohort CSV (hospital_id,day,cases,incidence)")->required();
  sub->add_option("--incidence-column", c.incidence_column, "Column used as the incidence covariate")
      ->capture_default_str();
}

void add_model(CLI::App* sub, RunConfig& c, FlagText& text) {
  sub->add_option("--steps", c.fit.steps, "Gradient steps")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--eta", text.eta, "Step sizes b1,b2,b3")->delimiter(',');
  sub->add_option("--lambda", c.fit.lambda, "L2 penalty weight")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--method", text.method, "Optimizer")->capture_default_str()->check(CLI::IsMember({"gd", "adam"}));
  sub->add_option("--incidence-scale", c.fit.incidence_scale, "Factor applied to incidence before fitting")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sub->add_option("--gradient-tolerance", c.fit.gradient_tolerance,
                  "Stop when every gradient entry is below this (0 disables)")
      ->capture_default_str();
  sub->add_option("--init", text.init, "Initial coefficients b1,b2,b3")->delimiter(',');
  sub->add_option("--share", c.share, "Coefficients shared across hospitals: none or a list of b1,b2,b3")
      ->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void finish_model(RunConfig& c, const FlagText& text) {
  if (!text.eta.empty()) c.fit.eta = triple(text.eta, "--eta");
  if (!text.init.empty()) c.fit.init = Beta::from_array(triple(text.init, "--init"));
  c.fit.method = parse_method(text.method);
  c.fit.validate();
}

// Option name "--mcar-rate" maps to config key "mcar_rate".
std::string key_of(const CLI::Option* opt) {
  std::string name = opt->get_name(false, true);
  while (!name.empty() && name.front() == '-') name.erase(name.begin());
  for (char& ch : name) {
    if (ch == '-') ch = '_';
  }
  return name;
}

// Settings from a JSON spec file, overridden by flags given explicitly.
RunConfig merge_spec(const RunConfig& from_flags, const CLI::App* sub, const std::string& path) {
  nlohmann::json merged = nlohmann::json::parse(read_file(path), nullptr, false);
  if (merged.is_discarded() || !merged.is_object()) throw UsageError("spec " + path + " is not a JSON object");
  (void)config_from_json(from_flags.command, merged);
  const nlohmann::ordered_json flags = config_to_json(from_flags);
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->count() == 0) continue;
    const std::string key = key_of(opt);
    if (flags.contains(key)) merged[key] = flags[key];
  }
  return config_from_json(from_flags.command, merged);
}

int report(const std::exception& e, int code) {
  spdlog::error("{}", e.what());
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  configure_logging();

  CLI::App app{"Gap-bridging increment regression for irregularly reported count series", "gapfit"};
  app.set_version_flag("--version", GAPFIT_VERSION);
  app.require_subcommand(1);

  RunConfig c;
  FlagText text;

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic cohort with ground truth");
  add_output(simulate, text);
  simulate->add_option("--spec", text.spec, "JSON file of simulate settings; flags override it");
  simulate->add_option("--seed", c.seed, "Base seed")->capture_default_str();
  simulate->add_option("--hospitals", c.hospitals, "Number of hospitals")->capture_default_str();
  simulate->add_option("--days", c.days, "Series length")->capture_default_str();
  simulate->add_option("--noise", c.noise, "Std. dev. of daily increment noise")->capture_default_str();
  simulate->add_option("--complete-fraction", c.missingness.complete_fraction, "Share of fully reporting hospitals")
      ->capture_default_str();
  simulate->add_option("--mcar-rate", c.missingness.mcar_rate, "Per-day isolated miss probability")
      ->capture_default_str();
  simulate->add_option("--gap-start-prob", c.missingness.gap_start_prob, "Per-day burst start probability")
      ->capture_default_str();
  simulate->add_option("--mean-gap-length", c.missingness.mean_gap_length, "Mean burst length")
      ->capture_default_str();
  simulate->add_option("--catchment", text.catchment, "Range lo,hi of each hospital's incidence share")
      ->delimiter(',');
  simulate->add_option("--initial-cases", text.initial_cases, "Range lo,hi of day-1 prevalent cases")
      ->delimiter(',');

  CLI::App* fit = app.add_subcommand("fit", "Fit the increment model to every hospital");
  add_output(fit, text);
  add_input(fit, c);
  add_model(fit, c, text);

  CLI::App* benchmark = app.add_subcommand("benchmark", "Withheld-last-day errors of all models");
  add_output(benchmark, text);
  add_input(benchmark, c);
  add_model(benchmark, c, text);
  benchmark->add_flag("--all-sharing", c.all_sharing, "Evaluate all eight sharing combinations");
  benchmark->add_option("--truth", c.truth, "Truth sidecar; adds a perfect-knowledge row");

  CLI::App* sensitivity = app.add_subcommand("sensitivity", "Sliding-window improvement over baselines");
  add_output(sensitivity, text);
  add_input(sensitivity, c);
  add_model(sensitivity, c, text);
  sensitivity->add_flag("--all-sharing", c.all_sharing, "Evaluate all eight sharing combinations");
  sensitivity->add_option("--window-len", c.window_len, "Window length in days")->capture_default_str();
  sensitivity->add_option("--baselines", c.baselines, "Baselines: zero, mean, modified_mean, linreg_locf, increment")
      ->delimiter(',')
      ->capture_default_str();

  CLI::App* censor = app.add_subcommand("censor", "Censor complete series and score reconstruction");
  add_output(censor, text);
  add_input(censor, c);
  add_model(censor, c, text);
  censor->add_flag("--all-sharing", c.all_sharing, "Evaluate all eight sharing combinations");
  censor->add_option("--rates", c.rates, "Censoring rates")->delimiter(',')->capture_default_str();
  censor->add_option("--reps", c.reps, "Repetitions per rate")->capture_default_str();
  censor->add_option("--seed", c.seed, "Base seed")->capture_default_str();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Compare autodiff gradients with finite differences");
  add_output(gradcheck, text);
  gradcheck->add_option("--trials", c.trials, "Random instances")->capture_default_str();
  gradcheck->add_option("--seed", c.seed, "Base seed")->capture_default_str();
  gradcheck->add_option("--tolerance", c.tolerance, "Largest accepted relative error")->capture_default_str();

  CLI::App* predict = app.add_subcommand("predict", "Bridged trajectories and forecasts");
  add_output(predict, text);
  add_input(predict, c);
  predict->add_option("--params", c.params, "Parameter table written by fit")->required();
  predict->add_option("--horizon", c.horizon, "Days to forecast past the last day")->capture_default_str();
  predict->add_option("--future", c.future, "CSV hospital_id,day,<incidence column> for days after T");

  CLI::App* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest and verify the outputs");
  rerun->add_option("manifest", text.manifest, "manifest.json of an earlier run")->required();
  auto* rerun_out = rerun->add_option("--output-dir,-o", text.output_dir, "Defaults to the manifest's directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageFailure;
  }

  try {
    if (rerun->parsed()) {
      const std::filesystem::path manifest = text.manifest;
      const std::filesystem::path out =
          rerun_out->count() ? std::filesystem::path(text.output_dir) : manifest.parent_path();
      replay(manifest, out.empty() ? std::filesystem::path(".") : out);
      spdlog::info("replay of {} matches", text.manifest);
      return kSuccess;
    }

    CLI::App* active = app.get_subcommands().front();
    c.command = active->get_name();
    if (active == simulate) {
      if (!text.catchment.empty()) c.catchment = pair(text.catchment, "--catchment");
      if (!text.initial_cases.empty()) c.initial_cases = pair(text.initial_cases, "--initial-cases");
      if (!text.spec.empty()) c = merge_spec(c, simulate, text.spec);
    }
    if (active == fit || active == benchmark || active == sensitivity || active == censor) finish_model(c, text);
    execute(c, text.output_dir);
    return kSuccess;
  } catch (const IoError& e) {
    return report(e, kIoFailure);
  } catch (const ParseError& e) {
    return report(e, kIoFailure);
  } catch (const std::filesystem::filesystem_error& e) {
    return report(e, kIoFailure);
  } catch (const UsageError& e) {
    return report(e, kUsageFailure);
  } catch (const InsufficientDataError& e) {
    return report(e, kUsageFailure);
  } catch (const CheckFailed& e) {
    return report(e, kNumericalFailure);
  } catch (const std::exception& e) {
    return report(e, kNumericalFailure);
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args);
}

}  // namespace gapfit::cli
