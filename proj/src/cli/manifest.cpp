#include "manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>

#include "commands.hpp"
#include "gapfit/cohort_io.hpp"
#include "gapfit/errors.hpp"

namespace gapfit::cli {

using nlohmann::json;
using nlohmann::ordered_json;

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

ordered_json records_json(const std::vector<FileRecord>& records) {
  ordered_json out = ordered_json::array();
  for (const auto& r : records) out.push_back({{"path", r.path}, {"fnv1a64", r.fnv1a64}});
  return out;
}

std::vector<FileRecord> records_from(const json& j) {
  std::vector<FileRecord> out;
  for (const auto& r : j) out.push_back({r.at("path").get<std::string>(), r.at("fnv1a64").get<std::string>()});
  return out;
}

}  // namespace

ordered_json Manifest::to_json() const {
  ordered_json j;
  j["tool"] = tool;
  j["version"] = version;
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = records_json(inputs);
  j["artifacts"] = records_json(artifacts);
  return j;
}

Manifest Manifest::from_json(const json& j) {
  try {
    Manifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.inputs = records_from(j.at("inputs"));
    m.artifacts = records_from(j.at("artifacts"));
    return m;
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed manifest: ") + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  write_file(path, manifest.to_json().dump(2) + "\n");
}

Manifest load_manifest(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw UsageError("manifest " + path.string() + " is not valid JSON");
  return Manifest::from_json(j);
}

// ---------------------------------------------------------------------------
// RunConfig <-> JSON

namespace {

struct Field {
  std::function<ordered_json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

template <class T>
Field member(T RunConfig::*field) {
  return {[field](const RunConfig& c) { return ordered_json(c.*field); },
          [field](RunConfig& c, const json& j) { c.*field = j.get<T>(); }};
}

template <class T>
Field fit_member(T FitConfig::*field) {
  return {[field](const RunConfig& c) { return ordered_json(c.fit.*field); },
          [field](RunConfig& c, const json& j) { c.fit.*field = j.get<T>(); }};
}

template <class T>
Field missing_member(T MissingnessSpec::*field) {
  return {[field](const RunConfig& c) { return ordered_json(c.missingness.*field); },
          [field](RunConfig& c, const json& j) { c.missingness.*field = j.get<T>(); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"input", member(&RunConfig::input)},
      {"incidence_column", member(&RunConfig::incidence_column)},
      {"seed", member(&RunConfig::seed)},
      {"threads", member(&RunConfig::threads)},
      {"hospitals", member(&RunConfig::hospitals)},
      {"days", member(&RunConfig::days)},
      {"noise", member(&RunConfig::noise)},
      {"complete_fraction", missing_member(&MissingnessSpec::complete_fraction)},
      {"mcar_rate", missing_member(&MissingnessSpec::mcar_rate)},
      {"gap_start_prob", missing_member(&MissingnessSpec::gap_start_prob)},
      {"mean_gap_length", missing_member(&MissingnessSpec::mean_gap_length)},
      {"catchment", member(&RunConfig::catchment)},
      {"initial_cases", member(&RunConfig::initial_cases)},
      {"steps", fit_member(&FitConfig::steps)},
      {"eta", fit_member(&FitConfig::eta)},
      {"lambda", fit_member(&FitConfig::lambda)},
      {"incidence_scale", fit_member(&FitConfig::incidence_scale)},
      {"gradient_tolerance", fit_member(&FitConfig::gradient_tolerance)},
      {"method",
       {[](const RunConfig& c) { return ordered_json(to_string(c.fit.method)); },
        [](RunConfig& c, const json& j) { c.fit.method = parse_method(j.get<std::string>()); }}},
      {"init",
       {[](const RunConfig& c) { return ordered_json(c.fit.init.to_array()); },
        [](RunConfig& c, const json& j) { c.fit.init = Beta::from_array(j.get<std::array<double, 3>>()); }}},
      {"share", member(&RunConfig::share)},
      {"all_sharing", member(&RunConfig::all_sharing)},
      {"truth", member(&RunConfig::truth)},
      {"window_len", member(&RunConfig::window_len)},
      {"baselines", member(&RunConfig::baselines)},
      {"rates", member(&RunConfig::rates)},
      {"reps", member(&RunConfig::reps)},
      {"trials", member(&RunConfig::trials)},
      {"tolerance", member(&RunConfig::tolerance)},
      {"params", member(&RunConfig::params)},
      {"future", member(&RunConfig::future)},
      {"horizon", member(&RunConfig::horizon)},
  };
  return table;
}

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate",    "fit",    "benchmark", "sensitivity",
                                                 "censor",      "gradcheck", "predict"};
  return names;
}

const std::vector<std::string>& config_keys(const std::string& command) {
  static const std::vector<std::string> model = {"input", "incidence_column", "share", "steps", "eta",
                                                 "lambda", "method", "incidence_scale",
                                                 "gradient_tolerance", "init", "threads"};
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"simulate",
       {"seed", "hospitals", "days", "noise", "complete_fraction", "mcar_rate", "gap_start_prob",
        "mean_gap_length", "catchment", "initial_cases"}},
      {"fit", model},
      {"benchmark", join({model, {"all_sharing", "truth"}})},
      {"sensitivity", join({model, {"all_sharing", "window_len", "baselines"}})},
      {"censor", join({model, {"all_sharing", "rates", "reps", "seed"}})},
      {"gradcheck", {"seed", "trials", "tolerance"}},
      {"predict", {"input", "incidence_column", "params", "future", "horizon"}},
  };
  const auto it = keys.find(command);
  if (it == keys.end()) throw UsageError("unknown command '" + command + "'");
  return it->second;
}

ordered_json config_to_json(const RunConfig& config) {
  ordered_json out = ordered_json::object();
  for (const auto& key : config_keys(config.command)) out[key] = fields().at(key).get(config);
  return out;
}

RunConfig config_from_json(const std::string& command, const json& j) {
  RunConfig config;
  config.command = command;
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  const auto& allowed = config_keys(command);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw UsageError("unknown config key '" + key + "' for " + command);
    }
    try {
      fields().at(key).set(config, value);
    } catch (const json::exception& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
  return config;
}

}  // namespace gapfit::cli
