#pragma once

// Cohort CSV files.
//
//   hospital_id,day,cases,incidence[,extra incidence columns...]
//
// One row per hospital and day; days are 1-based and contiguous per
// hospital. An empty `cases` cell means "not reported". Incidence cells are
// required. Reals are written with the shortest representation that reads
// back to the same double.
//
// The truth sidecar has hospital_id,day,true_b1,true_b2,true_b3,true_cases.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gapfit/datagen.hpp"
#include "gapfit/series.hpp"

namespace gapfit {

std::string format_real(double value);
// Parses a whole cell as a finite double; throws ParseError on failure.
double parse_real(std::string_view cell, std::size_t line);

struct LoadedCohort {
  Cohort cohort;
  // Hospitals dropped for having fewer than 2 reports.
  std::vector<std::string> excluded;
};

// Hospitals keep their order of first appearance. `incidence_column`
// selects which column feeds the covariate. Throws IoError when the file
// cannot be read and ParseError (with line number) on malformed content.
LoadedCohort load_cohort(const std::filesystem::path& path,
                         const std::string& incidence_column = "incidence");
LoadedCohort parse_cohort(std::string_view text, const std::string& incidence_column = "incidence");

void save_cohort(const std::filesystem::path& path, const Cohort& cohort);
std::string format_cohort(const Cohort& cohort);

void save_truth(const std::filesystem::path& path, const std::vector<GroundTruth>& truth);
std::string format_truth(const std::vector<GroundTruth>& truth);
std::vector<GroundTruth> load_truth(const std::filesystem::path& path);
std::vector<GroundTruth> parse_truth(std::string_view text);

// Small helpers shared with the CLI.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
// Fields may be double-quoted; a quote inside a quoted field is doubled.
std::vector<std::string> split_csv_line(std::string_view line);
// Quotes a field only when it contains a comma, quote or line break.
std::string quote_csv_field(std::string_view field);

}  // namespace gapfit
