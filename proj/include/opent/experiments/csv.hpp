#pragma once

#include "opent/types.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace opent::experiments {

inline constexpr const char* kCsvMagic = "# opent-csv v1";

/// Shortest round-trip representation; inf and nan spelled out.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  // Prefer the shortest form that parses back exactly.
  for (int p = 1; p < 17; ++p) {
    char trial[32];
    std::snprintf(trial, sizeof(trial), "%.*g", p, x);
    if (std::strtod(trial, nullptr) == x) return trial;
  }
  return buf;
}

/// A rectangular table of preformatted cells.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  /// Extra `# key=value` lines written after the magic line.
  std::vector<std::string> comments;

  struct RowBuilder {
    std::vector<std::string> cells;
    RowBuilder& operator<<(const std::string& s) {
      cells.push_back(s);
      return *this;
    }
    RowBuilder& operator<<(const char* s) {
      cells.emplace_back(s);
      return *this;
    }
    RowBuilder& operator<<(double x) {
      cells.push_back(format_number(x));
      return *this;
    }
    RowBuilder& operator<<(int x) {
      cells.push_back(std::to_string(x));
      return *this;
    }
    RowBuilder& operator<<(long x) {
      cells.push_back(std::to_string(x));
      return *this;
    }
    RowBuilder& operator<<(long long x) {
      cells.push_back(std::to_string(x));
      return *this;
    }
    RowBuilder& operator<<(unsigned long x) {
      cells.push_back(std::to_string(x));
      return *this;
    }
    RowBuilder& operator<<(unsigned long long x) {
      cells.push_back(std::to_string(x));
      return *this;
    }
    RowBuilder& operator<<(bool b) {
      cells.emplace_back(b ? "true" : "false");
      return *this;
    }
  };

  void add(const RowBuilder& r) {
    if (r.cells.size() != columns.size()) {
      throw DimensionError("table " + name + ": row has " + std::to_string(r.cells.size()) + " cells, expected " +
                           std::to_string(columns.size()));
    }
    rows.push_back(r.cells);
  }

  void append(const Table& other) {
    if (other.columns != columns) throw DimensionError("table " + name + ": column mismatch on append");
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  }

  std::size_t column_index(const std::string& col) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == col) return i;
    }
    throw DimensionError("table " + name + ": no column '" + col + "'");
  }

  double number(std::size_t row, const std::string& col) const {
    const auto& s = rows.at(row).at(column_index(col));
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
    return std::stod(s);
  }

  const std::string& text(std::size_t row, const std::string& col) const {
    return rows.at(row).at(column_index(col));
  }
};

inline std::string escape_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string to_csv(const Table& t) {
  std::ostringstream os;
  os << kCsvMagic << '\n';
  for (const auto& c : t.comments) os << "# " << c << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << escape_cell(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << escape_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::filesystem::path write_csv(const Table& t, const std::filesystem::path& dir) {
  const auto path = dir / (t.name + ".csv");
  write_file_atomic(path, to_csv(t));
  return path;
}

/// Parses a file produced by to_csv. Comment lines are returned separately.
inline Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  Table t;
  t.name = path.stem().string();
  std::string line;
  if (!std::getline(in, line) || line != kCsvMagic) throw ConfigError(path.string() + ": missing csv header");
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < l.size(); ++i) {
      const char c = l[i];
      if (quoted) {
        if (c == '"' && i + 1 < l.size() && l[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0 && !have_header) {
      t.comments.push_back(line.substr(2));
      continue;
    }
    if (!have_header) {
      t.columns = split(line);
      have_header = true;
    } else if (!line.empty()) {
      t.rows.push_back(split(line));
    }
  }
  return t;
}

}  // namespace opent::experiments
