#include "padist/csv.h"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "padist/error.h"

namespace padist::csv {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.9g}", v);
}

void Writer::header(const std::vector<std::string>& cols) {
  for (const auto& c : cols) cell(c);
  end_row();
}

Writer& Writer::cell(const std::string& s) {
  if (!first_) os_ << ',';
  os_ << s;
  first_ = false;
  return *this;
}

Writer& Writer::cell(double v) { return cell(fmt_double(v)); }

Writer& Writer::cell(long long v) { return cell(std::to_string(v)); }

void Writer::end_row() {
  os_ << '\n';
  first_ = true;
}

int Table::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  throw IoError("CSV column '" + name + "' not found");
}

double Table::number(size_t row, int col) const {
  const std::string& s = rows.at(row).at(col);
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError("CSV row " + std::to_string(row + 1) + ", column '" +
                  columns.at(col) + "': not a number: '" + s + "'");
  }
  return v;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Table read(std::istream& is) {
  Table t;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    if (!have_header && line[0] == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    auto cells = split(line);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw IoError("CSV row " + std::to_string(t.rows.size() + 1) + " has " +
                    std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(t.columns.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError("CSV input has no header row");
  return t;
}

Table read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read(is);
}

}  // namespace padist::csv
