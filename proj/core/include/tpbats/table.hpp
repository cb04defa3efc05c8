#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace tpbats::table {

/// Comma-separated table. On disk, metadata comes first as "# key=value"
/// lines, then one header row (column names carry units, e.g.
/// "transmissions[pkt]"), then data rows. Cells may not contain commas,
/// quotes or line breaks.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  /// Value of a metadata key; throws ConfigError if absent.
  const std::string& meta_value(const std::string& key) const;

  friend bool operator==(const Table&, const Table&) = default;
};

void write_csv(std::ostream& out, const Table& t);
/// Throws ConfigError (field "table") on ragged rows or a missing header.
Table read_csv(std::istream& in);

/// Shortest text that parses back to the same double.
std::string format_double(double x);
std::string format_count(std::size_t x);

}  // namespace tpbats::table
