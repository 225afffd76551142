#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace padist::csv {

// 9 significant digits, '.' decimal, independent of the global locale.
std::string fmt_double(double v);

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void header(const std::vector<std::string>& cols);
  Writer& cell(const std::string& s);
  Writer& cell(double v);
  Writer& cell(long long v);
  Writer& cell(int v) { return cell(static_cast<long long>(v)); }
  Writer& cell(size_t v) { return cell(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ostream& os_;
  bool first_ = true;
};

// Minimal reader for the files this project writes: comma separated, no
// quoting, optional leading '#' comment lines, one header row.
struct Table {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws IoError if absent
  double number(size_t row, int col) const;
  size_t size() const { return rows.size(); }
};

Table read(std::istream& is);
Table read_file(const std::string& path);

}  // namespace padist::csv
