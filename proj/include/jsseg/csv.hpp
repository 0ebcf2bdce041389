#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jsseg::csv {

/// Splits one line on commas. No quoting: none of our formats embed commas.
std::vector<std::string> split(std::string_view line);

/// Header-indexed table. Throws DataError on a missing header or ragged rows.
class Table {
 public:
  static Table read(std::istream& in);

  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Shortest representation that round-trips.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

double parse_number(std::string_view text);
std::optional<double> parse_optional(std::string_view text);
std::size_t parse_count(std::string_view text);

}  // namespace jsseg::csv
