#include "jsseg/csv.hpp"

#include <algorithm>
#include <charconv>
#include <istream>

#include <fmt/format.h>

#include "jsseg/error.hpp"

namespace jsseg::csv {

std::vector<std::string> split(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

Table Table::read(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV input");
  table.header_ = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto fields = split(line);
    if (fields.size() != table.header_.size()) {
      throw DataError(fmt::format("line {}: expected {} fields, got {}", lineno, table.header_.size(),
                                  fields.size()));
    }
    table.rows_.push_back(std::move(fields));
  }
  return table;
}

bool Table::has_column(std::string_view name) const {
  return std::find(header_.begin(), header_.end(), name) != header_.end();
}

std::size_t Table::column(std::string_view name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw DataError(fmt::format("missing column '{}'", name));
  return static_cast<std::size_t>(it - header_.begin());
}

std::string format_number(double value) { return fmt::format("{}", value); }

std::string format_optional(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string{};
}

double parse_number(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    // from_chars rejects a leading '+', which tick files use.
    if (text.size() > 1 && text.front() == '+') return parse_number(text.substr(1));
    throw DataError(fmt::format("invalid number '{}'", text));
  }
  return value;
}

std::optional<double> parse_optional(std::string_view text) {
  if (text.empty()) return std::nullopt;
  return parse_number(text);
}

std::size_t parse_count(std::string_view text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError(fmt::format("invalid count '{}'", text));
  }
  return value;
}

}  // namespace jsseg::csv
