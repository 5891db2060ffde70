#pragma once
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pursuit/error.hpp"

namespace pursuit {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<double> column(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw IngestError("missing column: " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(idx)]);
    return out;
  }
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> parts;
  std::string item;
  std::stringstream ss(line);
  while (std::getline(ss, item, delim)) parts.push_back(trim(item));
  return parts;
}

// Reads a numeric CSV with a header row. A leading '#' on the header (the
// racetrack-file convention) is stripped.
inline CsvTable read_csv(const std::string& path, char delim = ',') {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open file: " + path);

  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (!have_header) {
      if (!t.empty() && t[0] == '#') t = trim(t.substr(1));
      table.columns = split(t, delim);
      have_header = true;
      continue;
    }
    if (t[0] == '#') continue;
    const auto parts = split(t, delim);
    if (parts.size() != table.columns.size())
      throw IngestError("row width mismatch in " + path);
    std::vector<double> row;
    row.reserve(parts.size());
    for (const auto& p : parts) {
      double v = 0.0;
      const auto res = std::from_chars(p.data(), p.data() + p.size(), v);
      if (res.ec != std::errc{}) throw IngestError("non-numeric value '" + p + "' in " + path);
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw IngestError("empty file: " + path);
  return table;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& header) : out_(path) {
    if (!out_) throw IngestError("cannot write file: " + path);
    out_ << header << "\n";
    out_.precision(17);
  }

  template <typename... Ts>
  void row(Ts... values) {
    bool first = true;
    ((out_ << (first ? "" : std::string(1, delim_)) << values, first = false), ...);
    out_ << "\n";
  }

  void set_delim(char d) { delim_ = d; }

 private:
  std::ofstream out_;
  char delim_ = ',';
};

}  // namespace pursuit
