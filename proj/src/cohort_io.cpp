#include "gapfit/cohort_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "gapfit/errors.hpp"

namespace gapfit {

std::string format_real(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_real(std::string_view cell, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw ParseError(line, "invalid number '" + std::string(cell) + "'");
  }
  return value;
}

namespace {

std::size_t parse_day(std::string_view cell, std::size_t line) {
  std::size_t value = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size() || value < 1) {
    throw ParseError(line, "invalid day '" + std::string(cell) + "'");
  }
  return value;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = end + 1;
  }
  return out;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(1, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') {
        cells.back() += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else {
      cells.back() += c;
    }
  }
  return cells;
}

std::string quote_csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

LoadedCohort parse_cohort(std::string_view text, const std::string& incidence_column) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front().empty()) throw ParseError(1, "missing header");
  const std::vector<std::string> header = split_csv_line(lines.front());
  const std::size_t id_col = column_index(header, "hospital_id");
  const std::size_t day_col = column_index(header, "day");
  const std::size_t cases_col = column_index(header, "cases");
  const std::size_t z_col = column_index(header, incidence_column);

  struct Rows {
    std::map<std::size_t, std::pair<std::optional<double>, double>> by_day;
    std::size_t last_line = 0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Rows> hospitals;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " cells, found " +
                                    std::to_string(cells.size()));
    }
    const std::string& id = cells[id_col];
    if (id.empty()) throw ParseError(line_no, "empty hospital_id");
    const std::size_t day = parse_day(cells[day_col], line_no);
    std::optional<double> cases;
    if (!cells[cases_col].empty()) {
      cases = parse_real(cells[cases_col], line_no);
      if (*cases < 0.0) throw ParseError(line_no, "negative cases");
    }
    if (cells[z_col].empty()) throw ParseError(line_no, "missing " + incidence_column);
    const double z = parse_real(cells[z_col], line_no);
    if (z < 0.0) throw ParseError(line_no, "negative " + incidence_column);

    auto [it, inserted] = hospitals.try_emplace(id);
    if (inserted) order.push_back(id);
    if (!it->second.by_day.emplace(day, std::make_pair(cases, z)).second) {
      throw ParseError(line_no, "duplicate day " + std::to_string(day) + " for " + id);
    }
    it->second.last_line = line_no;
  }

  LoadedCohort out;
  for (const auto& id : order) {
    const Rows& rows = hospitals.at(id);
    std::vector<std::optional<double>> cases;
    std::vector<double> z;
    std::size_t expected = 1;
    for (const auto& [day, cell] : rows.by_day) {
      if (day != expected) {
        throw ParseError(rows.last_line, "hospital " + id + " is missing day " + std::to_string(expected));
      }
      ++expected;
      cases.push_back(cell.first);
      z.push_back(cell.second);
    }
    const auto reports = std::count_if(cases.begin(), cases.end(), [](const auto& y) { return y.has_value(); });
    if (cases.size() < 2 || reports < 2) {
      out.excluded.push_back(id);
      continue;
    }
    out.cohort.emplace_back(id, std::move(cases), std::move(z));
  }
  return out;
}

LoadedCohort load_cohort(const std::filesystem::path& path, const std::string& incidence_column) {
  return parse_cohort(read_file(path), incidence_column);
}

std::string format_cohort(const Cohort& cohort) {
  std::string out = "hospital_id,day,cases,incidence\n";
  for (const auto& s : cohort) {
    for (std::size_t t = 0; t < s.days(); ++t) {
      out += quote_csv_field(s.id());
      out += ',';
      out += std::to_string(t + 1);
      out += ',';
      if (s.cases()[t]) out += format_real(*s.cases()[t]);
      out += ',';
      out += format_real(s.incidence()[t]);
      out += '\n';
    }
  }
  return out;
}

void save_cohort(const std::filesystem::path& path, const Cohort& cohort) {
  write_file(path, format_cohort(cohort));
}

std::string format_truth(const std::vector<GroundTruth>& truth) {
  std::string out = "hospital_id,day,true_b1,true_b2,true_b3,true_cases\n";
  for (const auto& g : truth) {
    for (std::size_t t = 0; t < g.cases.size(); ++t) {
      out += quote_csv_field(g.id) + ',' + std::to_string(t + 1) + ',' + format_real(g.beta.b1) + ',' +
             format_real(g.beta.b2) + ',' + format_real(g.beta.b3) + ',' + format_real(g.cases[t]) + '\n';
    }
  }
  return out;
}

void save_truth(const std::filesystem::path& path, const std::vector<GroundTruth>& truth) {
  write_file(path, format_truth(truth));
}

std::vector<GroundTruth> load_truth(const std::filesystem::path& path) {
  return parse_truth(read_file(path));
}

std::vector<GroundTruth> parse_truth(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw ParseError(1, "missing header");
  const auto header = split_csv_line(lines.front());
  const std::size_t id_col = column_index(header, "hospital_id");
  const std::size_t day_col = column_index(header, "day");
  const std::size_t cols[3] = {column_index(header, "true_b1"), column_index(header, "true_b2"),
                               column_index(header, "true_b3")};
  const std::size_t cases_col = column_index(header, "true_cases");

  std::vector<GroundTruth> out;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    if (cells.size() != header.size()) throw ParseError(line_no, "wrong number of cells");
    auto [it, inserted] = index.try_emplace(cells[id_col], out.size());
    if (inserted) {
      GroundTruth g;
      g.id = cells[id_col];
      for (std::size_t j = 0; j < 3; ++j) g.beta[j] = parse_real(cells[cols[j]], line_no);
      out.push_back(std::move(g));
    }
    GroundTruth& g = out[it->second];
    if (parse_day(cells[day_col], line_no) != g.cases.size() + 1) {
      throw ParseError(line_no, "days must be contiguous and ordered");
    }
    g.cases.push_back(parse_real(cells[cases_col], line_no));
  }
  return out;
}

}  // namespace gapfit
