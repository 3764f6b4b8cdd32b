#include "dpc/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dpc/errors.hpp"

namespace dpc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

SeriesPanel read_panel_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) {
    throw InputError("'" + path.string() + "' is empty (header row required)");
  }
  std::vector<std::string> labels;
  for (auto& cell : split_line(line)) labels.push_back(trimmed(cell));
  if (labels.empty()) {
    throw InputError("'" + path.string() + "' has an empty header row");
  }
  const std::size_t m = labels.size();

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trimmed(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != m) {
      throw InputError(path.string() + ":" + std::to_string(lineno) +
                       ": expected " + std::to_string(m) + " cells, found " +
                       std::to_string(cells.size()));
    }
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) {
      const std::string cell = trimmed(cells[j]);
      double value = 0.0;
      // from_chars rejects an explicit plus sign; accept it anyway
      const char* begin = cell.data();
      const char* end = cell.data() + cell.size();
      if (begin != end && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec != std::errc{} || ptr != end || begin == end) {
        throw InputError(path.string() + ":" + std::to_string(lineno) +
                         ": column " + std::to_string(j + 1) +
                         ": cannot parse '" + cell + "' as a number");
      }
      if (!std::isfinite(value)) {
        throw InputError(path.string() + ":" + std::to_string(lineno) +
                         ": column " + std::to_string(j + 1) +
                         ": non-finite value");
      }
      row[j] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw InputError("'" + path.string() + "' has a header but no data rows");
  }

  Eigen::MatrixXd values(rows.size(), m);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t j = 0; j < m; ++j) values(t, j) = rows[t][j];
  }
  return SeriesPanel::make(std::move(values), std::move(labels));
}

void write_panel_csv(const std::filesystem::path& path,
                     const SeriesPanel& panel) {
  panel.validate();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (Eigen::Index j = 0; j < panel.cols(); ++j) {
    if (j) out << ',';
    out << panel.labels[j];
  }
  out << '\n';
  char buf[64];
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", panel.values(t, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

}  // namespace dpc
