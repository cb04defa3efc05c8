#include "tpbats/table.hpp"

#include <array>
#include <charconv>
#include <sstream>

#include "tpbats/errors.hpp"

namespace tpbats::table {
namespace {

void check_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") != std::string::npos) {
    throw ConfigError("table", "table: cell \"" + cell + "\" contains a separator");
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << row[i];
  }
  out << '\n';
}

}  // namespace

void Table::add_row(std::vector<std::string> row) {
  if (row.size() != columns.size()) {
    throw ConfigError("table", "table: row has " + std::to_string(row.size()) +
                                   " cells, header has " + std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

const std::string& Table::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw ConfigError(key, "table: no metadata key " + key);
}

void write_csv(std::ostream& out, const Table& t) {
  for (const auto& [k, v] : t.meta) {
    if (k.find('=') != std::string::npos || v.find('\n') != std::string::npos) {
      throw ConfigError("table", "table: bad metadata entry " + k);
    }
    out << "# " << k << '=' << v << '\n';
  }
  for (const auto& c : t.columns) check_cell(c);
  write_row(out, t.columns);
  for (const auto& r : t.rows) {
    if (r.size() != t.columns.size()) throw ConfigError("table", "table: ragged row");
    for (const auto& c : r) check_cell(c);
    write_row(out, r);
  }
}

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("table", "table: bad metadata line");
      t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      continue;
    }
    if (line.empty()) continue;
    if (!header) {
      t.columns = split(line);
      header = true;
      continue;
    }
    t.add_row(split(line));
  }
  if (!header) throw ConfigError("table", "table: missing header row");
  return t;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string format_count(std::size_t x) { return std::to_string(x); }

}  // namespace tpbats::table
