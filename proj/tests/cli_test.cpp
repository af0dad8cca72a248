#include "gapfit/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "gapfit/cohort_io.hpp"
#include "gapfit/optimizer.hpp"

namespace gapfit {
namespace {

namespace fs = std::filesystem;
using Rows = std::vector<std::map<std::string, std::string>>;

Rows read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  Rows rows;
  std::vector<std::string> header;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    const auto cells = split_csv_line(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (header.empty()) {
      header = cells;
      continue;
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < cells.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(read_file(path)); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("gapfit_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  int run(std::vector<std::string> args) { return cli::run(args); }

  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  // Small cohort simulated through the CLI itself.
  std::string simulate(const std::string& name, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"simulate", "-o", dir(name), "--noise", "0.5"};
    if (std::find(extra.begin(), extra.end(), "--hospitals") == extra.end()) {
      args.insert(args.end(), {"--hospitals", "6"});
    }
    args.insert(args.end(), extra.begin(), extra.end());
    EXPECT_EQ(run(args), 0);
    return dir(name);
  }

  fs::path root_;
};

TEST_F(CliTest, SimulateWritesFilesAndManifest) {
  const std::string out = simulate("sim");
  for (const char* f : {"cohort.csv", "truth.csv", "simulate.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(out) / f)) << f;
  }
  const auto manifest = read_json(fs::path(out) / "manifest.json");
  EXPECT_EQ(manifest["tool"], "gapfit");
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["config"]["hospitals"], 6);
  EXPECT_EQ(manifest["artifacts"].size(), 3u);
  EXPECT_EQ(load_cohort(fs::path(out) / "cohort.csv").cohort.size(), 6u);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  const std::string a = simulate("a", {"--seed", "5"});
  const std::string b = simulate("b", {"--seed", "5"});
  const std::string c = simulate("c", {"--seed", "6"});
  EXPECT_EQ(read_file(fs::path(a) / "cohort.csv"), read_file(fs::path(b) / "cohort.csv"));
  EXPECT_EQ(read_file(fs::path(a) / "manifest.json"), read_file(fs::path(b) / "manifest.json"));
  EXPECT_NE(read_file(fs::path(a) / "cohort.csv"), read_file(fs::path(c) / "cohort.csv"));
}

TEST_F(CliTest, SimulateRejectsBadProbability) {
  EXPECT_EQ(run({"simulate", "-o", dir("bad"), "--mcar-rate", "1.5"}), 2);
  EXPECT_EQ(run({"simulate", "-o", dir("bad"), "--catchment", "0.1"}), 2);
}

TEST_F(CliTest, SimulateSpecFileWithFlagOverride) {
  const fs::path spec = root_ / "spec.json";
  write_file(spec, R"({"hospitals": 4, "days": 20, "seed": 3})");
  ASSERT_EQ(run({"simulate", "-o", dir("s"), "--spec", spec.string(), "--days", "15"}), 0);
  const auto cohort = load_cohort(fs::path(dir("s")) / "cohort.csv").cohort;
  ASSERT_EQ(cohort.size(), 4u);
  EXPECT_EQ(cohort[0].days(), 15u);
  write_file(spec, R"({"hospitalz": 4})");
  EXPECT_EQ(run({"simulate", "-o", dir("t"), "--spec", spec.string()}), 2);
}

TEST_F(CliTest, ParseFailuresAreUsageErrors) {
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"fit"}), 2);
  EXPECT_EQ(run({"fit", "--input", "x.csv", "--bogus"}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
  EXPECT_EQ(run({"fit", "--input", "x.csv", "--method", "newton"}), 2);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({"--version"}), 0);
}

TEST_F(CliTest, MissingInputIsIoError) {
  EXPECT_EQ(run({"fit", "--input", dir("nope.csv"), "-o", dir("fit")}), 1);
  EXPECT_EQ(run({"benchmark", "--input", dir("nope.csv"), "-o", dir("b")}), 1);
}

TEST_F(CliTest, MalformedInputIsIoError) {
  const fs::path bad = root_ / "bad.csv";
  write_file(bad, "hospital_id,day,cases,incidence\nA,1,-3,1\n");
  EXPECT_EQ(run({"fit", "--input", bad.string(), "-o", dir("fit")}), 1);
}

TEST_F(CliTest, FitWithoutSharingMatchesLibrary) {
  const std::string sim = simulate("sim");
  const std::string cohort_path = sim + "/cohort.csv";
  ASSERT_EQ(run({"fit", "-i", cohort_path, "-o", dir("fit"), "--steps", "200", "--share", "none"}), 0);
  const auto rows = read_csv(fs::path(dir("fit")) / "parameters.csv");
  const auto cohort = load_cohort(cohort_path).cohort;
  ASSERT_EQ(rows.size(), cohort.size());
  FitConfig c;
  c.steps = 200;
  for (std::size_t k = 0; k < cohort.size(); ++k) {
    const FitResult r = fit(cohort[k], c);
    EXPECT_EQ(rows[k].at("hospital_id"), cohort[k].id());
    EXPECT_EQ(rows[k].at("b1"), format_real(r.beta.b1));
    EXPECT_EQ(rows[k].at("b2"), format_real(r.beta.b2));
    EXPECT_EQ(rows[k].at("b3"), format_real(r.beta.b3));
    EXPECT_EQ(rows[k].at("fell_back"), r.fell_back ? "true" : "false");
  }
  const auto traces = read_csv(fs::path(dir("fit")) / "loss_traces.csv");
  EXPECT_EQ(traces.size(), cohort.size() * 201);
}

TEST_F(CliTest, FitWithFullSharingGivesEqualParameters) {
  const std::string sim = simulate("sim");
  ASSERT_EQ(run({"fit", "-i", sim + "/cohort.csv", "-o", dir("fit"), "--steps", "100", "--share", "b1,b2,b3"}), 0);
  const auto rows = read_csv(fs::path(dir("fit")) / "parameters.csv");
  for (const auto& row : rows) {
    EXPECT_EQ(row.at("b1"), rows[0].at("b1"));
    EXPECT_EQ(row.at("b2"), rows[0].at("b2"));
    EXPECT_EQ(row.at("b3"), rows[0].at("b3"));
  }
}

TEST_F(CliTest, FitRejectsBadSettings) {
  const std::string sim = simulate("sim");
  EXPECT_EQ(run({"fit", "-i", sim + "/cohort.csv", "-o", dir("f"), "--eta", "1,2"}), 2);
  EXPECT_EQ(run({"fit", "-i", sim + "/cohort.csv", "-o", dir("f"), "--eta", "1,-2,3"}), 2);
  EXPECT_EQ(run({"fit", "-i", sim + "/cohort.csv", "-o", dir("f"), "--share", "b7"}), 2);
  EXPECT_EQ(run({"fit", "-i", sim + "/cohort.csv", "-o", dir("f"), "--incidence-column", "other"}), 1);
}

TEST_F(CliTest, BenchmarkReportsAllModelsAndAgreesAcrossFormats) {
  const std::string sim = simulate("sim", {"--hospitals", "10"});
  ASSERT_EQ(run({"benchmark", "-i", sim + "/cohort.csv", "--truth", sim + "/truth.csv", "-o", dir("bench"),
                 "--steps", "100"}),
            0);
  const auto rows = read_csv(fs::path(dir("bench")) / "benchmark.csv");
  const auto doc = read_json(fs::path(dir("bench")) / "benchmark.json");
  std::vector<std::string> models;
  for (const auto& r : rows) models.push_back(r.at("model"));
  EXPECT_EQ(models, (std::vector<std::string>{"increment[none]", "zero", "mean", "modified_mean", "linreg_locf", "truth"}));
  ASSERT_EQ(doc["models"].size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& j = doc["models"][i];
    EXPECT_EQ(j["model"], rows[i].at("model"));
    for (const char* col : {"sum", "mean", "q1", "median", "q3"}) {
      EXPECT_EQ(j[col].get<double>(), parse_real(rows[i].at(col), 0)) << col;
    }
    EXPECT_EQ(j["n"].get<long long>(), std::stoll(rows[i].at("n")));
  }
  const auto& truth = rows.back();
  EXPECT_EQ(parse_real(truth.at("sum"), 0), 0.0);
  EXPECT_EQ(parse_real(truth.at("median"), 0), 0.0);
}

TEST_F(CliTest, BenchmarkAllSharingHasEightIncrementRows) {
  const std::string sim = simulate("sim");
  ASSERT_EQ(run({"benchmark", "-i", sim + "/cohort.csv", "-o", dir("bench"), "--steps", "20", "--all-sharing"}), 0);
  const auto rows = read_csv(fs::path(dir("bench")) / "benchmark.csv");
  EXPECT_EQ(rows.size(), 12u);
}

TEST_F(CliTest, SensitivityWindows) {
  const std::string sim = simulate("sim", {"--hospitals", "4"});
  EXPECT_EQ(run({"sensitivity", "-i", sim + "/cohort.csv", "-o", dir("s"), "--window-len", "71"}), 2);
  ASSERT_EQ(run({"sensitivity", "-i", sim + "/cohort.csv", "-o", dir("s"), "--window-len", "35", "--steps", "5",
                 "--baselines", "mean,increment"}),
            0);
  const auto windows = read_csv(fs::path(dir("s")) / "windows.csv");
  ASSERT_EQ(windows.size(), 36u);
  EXPECT_EQ(windows.front().at("start"), "1");
  EXPECT_EQ(windows.front().at("end"), "35");
  EXPECT_EQ(windows.back().at("end"), "70");
  const auto table = read_csv(fs::path(dir("s")) / "sensitivity.csv");
  ASSERT_EQ(table.size(), 2u);
  for (const char* col : {"q1", "median", "q3"}) EXPECT_TRUE(table[0].count(col));
  // The increment model compared with itself improves by exactly nothing.
  EXPECT_EQ(table[1].at("baseline"), "increment[none]");
  EXPECT_EQ(parse_real(table[1].at("q1"), 0), 0.0);
  EXPECT_EQ(parse_real(table[1].at("q3"), 0), 0.0);
  const auto doc = read_json(fs::path(dir("s")) / "sensitivity.json");
  EXPECT_EQ(doc["windows"].size(), 36u);
}

TEST_F(CliTest, CensorProducesOneBlockPerRate) {
  const std::string sim = simulate("sim", {"--hospitals", "4", "--complete-fraction", "1"});
  ASSERT_EQ(run({"censor", "-i", sim + "/cohort.csv", "-o", dir("c"), "--steps", "20", "--reps", "10"}), 0);
  const auto rows = read_csv(fs::path(dir("c")) / "recovery.csv");
  std::map<std::string, int> per_rate;
  for (const auto& r : rows) ++per_rate[r.at("rate")];
  EXPECT_EQ(per_rate.size(), 4u);
  for (const auto& [rate, n] : per_rate) EXPECT_EQ(n, 5) << rate;
}

TEST_F(CliTest, CensorNeedsCompleteCohort) {
  const std::string sim = simulate("sim", {"--complete-fraction", "0", "--mcar-rate", "0.3"});
  EXPECT_EQ(run({"censor", "-i", sim + "/cohort.csv", "-o", dir("c"), "--steps", "5"}), 2);
}

TEST_F(CliTest, CensorRejectsBadRate) {
  const std::string sim = simulate("sim", {"--complete-fraction", "1"});
  EXPECT_EQ(run({"censor", "-i", sim + "/cohort.csv", "-o", dir("c"), "--rates", "1.2"}), 2);
}

TEST_F(CliTest, Gradcheck) {
  ASSERT_EQ(run({"gradcheck", "-o", dir("g")}), 0);
  const auto rows = read_csv(fs::path(dir("g")) / "gradcheck.csv");
  EXPECT_EQ(rows.size(), 1000u);
  for (const auto& r : rows) EXPECT_EQ(r.at("pass"), "true");
  EXPECT_EQ(run({"gradcheck", "-o", dir("g0"), "--trials", "0"}), 2);
  EXPECT_EQ(run({"gradcheck", "-o", dir("g1"), "--tolerance", "0"}), 2);
}

TEST_F(CliTest, PredictBridgesAndForecasts) {
  const fs::path cohort = root_ / "cohort.csv";
  write_file(cohort,
             "hospital_id,day,cases,incidence\n"
             "A,1,,1\nA,2,4,1\nA,3,,1\nA,4,6,1\n");
  const fs::path params = root_ / "params.csv";
  write_file(params, "hospital_id,b1,b2,b3\nA,0,0,0\n");
  const fs::path future = root_ / "future.csv";
  write_file(future, "hospital_id,day,incidence\nA,5,2\nA,6,2\n");

  ASSERT_EQ(run({"predict", "-i", cohort.string(), "--params", params.string(), "-o", dir("p0")}), 0);
  const auto rows = read_csv(fs::path(dir("p0")) / "trajectory.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].at("segment"), "before_first_report");
  EXPECT_EQ(rows[2].at("segment"), "bridged");
  EXPECT_EQ(rows[2].at("y_tilde"), "4");

  EXPECT_EQ(run({"predict", "-i", cohort.string(), "--params", params.string(), "-o", dir("p1"), "--horizon", "3"}), 2);

  ASSERT_EQ(run({"predict", "-i", cohort.string(), "--params", params.string(), "--future", future.string(),
                 "-o", dir("p2"), "--horizon", "3"}),
            0);
  const auto fc = read_csv(fs::path(dir("p2")) / "trajectory.csv");
  ASSERT_EQ(fc.size(), 7u);
  for (std::size_t i = 4; i < 7; ++i) {
    EXPECT_EQ(fc[i].at("segment"), "forecast");
    EXPECT_EQ(fc[i].at("y_tilde"), "6");
  }
}

TEST_F(CliTest, PredictUsesFitOutput) {
  const std::string sim = simulate("sim");
  ASSERT_EQ(run({"fit", "-i", sim + "/cohort.csv", "-o", dir("fit"), "--steps", "50"}), 0);
  ASSERT_EQ(run({"predict", "-i", sim + "/cohort.csv", "--params", dir("fit") + "/parameters.csv", "-o", dir("p")}),
            0);
  EXPECT_EQ(read_csv(fs::path(dir("p")) / "trajectory.csv").size(), 6u * 70u);
}

TEST_F(CliTest, EveryCommandReplaysFromItsManifest) {
  const std::string sim = simulate("sim", {"--complete-fraction", "1", "--hospitals", "4"});
  const std::string cohort = sim + "/cohort.csv";
  ASSERT_EQ(run({"fit", "-i", cohort, "-o", dir("fit"), "--steps", "30", "--share", "b2", "--threads", "2"}), 0);
  ASSERT_EQ(run({"benchmark", "-i", cohort, "-o", dir("bench"), "--steps", "30", "--truth", sim + "/truth.csv"}), 0);
  ASSERT_EQ(run({"sensitivity", "-i", cohort, "-o", dir("sens"), "--steps", "5", "--window-len", "60"}), 0);
  ASSERT_EQ(run({"censor", "-i", cohort, "-o", dir("cens"), "--steps", "10", "--reps", "2", "--rates", "0.25,0.5"}), 0);
  ASSERT_EQ(run({"gradcheck", "-o", dir("grad"), "--trials", "50", "--seed", "4"}), 0);
  ASSERT_EQ(run({"predict", "-i", cohort, "--params", dir("fit") + "/parameters.csv", "-o", dir("pred")}), 0);

  for (const char* name : {"sim", "fit", "bench", "sens", "cens", "grad", "pred"}) {
    const fs::path manifest = fs::path(dir(name)) / "manifest.json";
    const auto recorded = read_json(manifest);
    const std::string again = dir(std::string(name) + "_again");
    ASSERT_EQ(run({"rerun", manifest.string(), "-o", again}), 0) << name;
    for (const auto& a : recorded["artifacts"]) {
      const std::string file = a["path"];
      EXPECT_EQ(read_file(fs::path(dir(name)) / file), read_file(fs::path(again) / file)) << name << "/" << file;
    }
    EXPECT_EQ(read_file(manifest), read_file(fs::path(again) / "manifest.json")) << name;
  }
}

TEST_F(CliTest, RerunDetectsChangedInput) {
  const std::string sim = simulate("sim");
  const std::string copy = (root_ / "copy.csv").string();
  fs::copy_file(sim + "/cohort.csv", copy);
  ASSERT_EQ(run({"fit", "-i", copy, "-o", dir("fit"), "--steps", "10"}), 0);
  write_file(copy, read_file(copy) + "\n");
  EXPECT_EQ(run({"rerun", dir("fit") + "/manifest.json", "-o", dir("again")}), 2);
  EXPECT_EQ(run({"rerun", dir("missing") + "/manifest.json"}), 1);
  write_file(root_ / "junk.json", "{not json");
  EXPECT_EQ(run({"rerun", (root_ / "junk.json").string()}), 2);
}

}  // namespace
}  // namespace gapfit
