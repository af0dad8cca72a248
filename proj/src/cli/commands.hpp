#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gapfit/datagen.hpp"
#include "gapfit/errors.hpp"
#include "gapfit/optimizer.hpp"
#include "manifest.hpp"

namespace gapfit::cli {

// Every setting any command reads. A command's manifest records only the
// keys that command uses (see config_keys).
struct RunConfig {
  std::string command;

  std::string input;
  std::string incidence_column = "incidence";
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  // simulate
  std::size_t hospitals = 100;
  std::size_t days = 70;
  double noise = 0.0;
  MissingnessSpec missingness = MissingnessSpec::registry_like();
  std::array<double, 2> catchment{0.005, 0.01};
  std::array<double, 2> initial_cases{0.0, 10.0};

  // model fitting
  FitConfig fit{};
  std::string share = "none";
  bool all_sharing = false;

  // benchmark
  std::string truth;

  // sensitivity
  std::size_t window_len = 35;
  std::vector<std::string> baselines{"mean"};

  // censor
  std::vector<double> rates{0.10, 0.25, 0.50, 0.75};
  std::size_t reps = 10;

  // gradcheck
  std::size_t trials = 1000;
  double tolerance = 1e-6;

  // predict
  std::string params;
  std::string future;
  std::size_t horizon = 0;
};

const std::vector<std::string>& command_names();
const std::vector<std::string>& config_keys(const std::string& command);

nlohmann::ordered_json config_to_json(const RunConfig& config);
// Keys absent from `json` keep their defaults. Throws UsageError on
// unknown keys or ill-typed values.
RunConfig config_from_json(const std::string& command, const nlohmann::json& json);

// Raised when the requested self check (gradcheck, manifest replay) fails.
class CheckFailed : public Error {
 public:
  using Error::Error;
};

// Runs the command and writes its artifacts and manifest.json into
// `output_dir`. Returns the manifest that was written.
Manifest execute(const RunConfig& config, const std::filesystem::path& output_dir);

// Replays a manifest into `output_dir` and compares every artifact digest
// with the recorded one. Throws CheckFailed on any difference.
Manifest replay(const std::filesystem::path& manifest_path, const std::filesystem::path& output_dir);

}  // namespace gapfit::cli
