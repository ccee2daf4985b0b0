#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tta/core/errors.hpp"

namespace tta {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw UsageError("csv: missing column " + name);
  }
};

/// Strict reader: every row must match the header width; errors name the
/// offending row.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("csv: cannot open " + path.string());
  CsvTable t;
  std::string line;
  int line_no = 0;
  const auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line);
    if (line_no == 1) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size())
        throw UsageError("csv: malformed row " + std::to_string(line_no) + " in " + path.string() +
                         " (expected " + std::to_string(t.header.size()) + " columns, got " +
                         std::to_string(cells.size()) + ")");
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw UsageError("csv: empty file " + path.string());
  return t;
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open for writing " + path.string());
  for (size_t i = 0; i < t.header.size(); ++i) f << (i ? "," : "") << t.header[i];
  f << "\n";
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i];
    f << "\n";
  }
}

}  // namespace tta
