#include "jsseg/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

#include "jsseg/csv.hpp"
#include "jsseg/error.hpp"

namespace jsseg {

TickParseResult parse_ticks(std::istream& in) {
  TickParseResult out;
  std::string line;
  if (!std::getline(in, line)) throw DataError("tick file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.empty() || line.front() != '#') {
    throw DataError(fmt::format("tick file must start with the header '{}'", kTickHeader));
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 6) {
      out.rejects.push_back({lineno, fmt::format("expected 6 fields, got {}", fields.size())});
      continue;
    }
    try {
      TickRecord rec;
      rec.ric = fields[0];
      if (rec.ric.empty()) throw DataError("empty instrument code");
      rec.timestamp = Timestamp{parse_us_date(fields[1])} + parse_time_of_day(fields[2]);
      rec.gmt_offset = static_cast<int>(csv::parse_number(fields[3]));
      rec.kind = fields[4];
      rec.price = csv::parse_number(fields[5]);
      if (!(rec.price > 0.0) || !std::isfinite(rec.price)) {
        throw DataError(fmt::format("non-positive price '{}'", fields[5]));
      }
      out.ticks.push_back(std::move(rec));
    } catch (const DataError& e) {
      out.rejects.push_back({lineno, e.what()});
    }
  }
  return out;
}

std::string sector_from_ric(const std::string& ric) {
  std::string_view code = ric;
  if (!code.empty() && code.front() == '.') code.remove_prefix(1);
  if (code.starts_with("DJUS") && code.size() > 4) code.remove_prefix(4);
  return std::string(code);
}

ResampleResult resample(std::vector<TickRecord> ticks, const TradingCalendar& cal,
                        const ResampleOptions& opts) {
  if (ticks.empty()) throw DataError("no ticks to resample");
  cal.validate();
  if (cal.days.empty()) throw DataError("calendar has no trading days");

  std::stable_sort(ticks.begin(), ticks.end(),
                   [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
  const auto by_time = [](const TickRecord& t, Timestamp ts) { return t.timestamp < ts; };

  ResampleResult result;
  auto& series = result.series;
  series.sector = sector_from_ric(ticks.front().ric);
  series.grid = cal.grid();
  series.values.assign(series.grid.size(), 0.0);

  double last = 0.0;
  bool have_last = false;
  std::size_t leading_gap = 0;
  std::size_t g = 0;
  for (Date day : cal.days) {
    const auto lo = cal.open_utc(day) - opts.pre_open_window;
    const auto hi = cal.close_utc(day);
    auto first = std::lower_bound(ticks.begin(), ticks.end(), lo, by_time);
    auto end = std::lower_bound(first, ticks.end(), hi, by_time);
    if (first == end) result.warnings.push_back(fmt::format("{}: no ticks, carrying forward", format_date(day)));
    for (std::size_t k = 0; k < cal.samples_per_day; ++k, ++g) {
      // last tick with timestamp strictly before the grid time
      auto it = std::lower_bound(first, end, series.grid[g], by_time);
      if (it != first) {
        last = std::prev(it)->price;
        have_last = true;
      }
      if (have_last) {
        series.values[g] = last;
      } else {
        ++leading_gap;
      }
    }
  }
  if (!have_last) throw DataError("no tick falls inside any trading session");
  if (leading_gap > 0) {
    const double first_value = series.values[leading_gap];
    std::fill_n(series.values.begin(), leading_gap, first_value);
    result.warnings.push_back(
        fmt::format("{} leading grid points had no prior tick; back-filled with {}", leading_gap, first_value));
  }
  return result;
}

LogReturnSeries log_returns(const HalfHourSeries& series) {
  if (series.values.size() < 2) throw DataError("log returns need at least two values");
  if (series.grid.size() != series.values.size()) throw DataError("grid and values differ in length");
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    if (!(series.values[i] > 0.0)) {
      throw DataError(fmt::format("non-positive index value {} at {}", series.values[i],
                                  format_timestamp(series.grid[i])));
    }
  }
  LogReturnSeries out;
  out.sector = series.sector;
  out.x.resize(series.values.size() - 1);
  for (std::size_t t = 0; t + 1 < series.values.size(); ++t) {
    out.x[t] = std::log(series.values[t + 1]) - std::log(series.values[t]);
  }
  out.base_grid.assign(series.grid.begin(), series.grid.end() - 1);
  return out;
}

void write_series_csv(std::ostream& out, const HalfHourSeries& series) {
  out << "timestamp,value\n";
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    out << format_timestamp(series.grid[i]) << ',' << csv::format_number(series.values[i]) << '\n';
  }
}

void write_series_json(std::ostream& out, const HalfHourSeries& series) {
  nlohmann::ordered_json j;
  j["sector"] = series.sector;
  auto& ts = j["timestamp"] = nlohmann::ordered_json::array();
  for (auto t : series.grid) ts.push_back(format_timestamp(t));
  j["value"] = series.values;
  out << j.dump() << '\n';
}

HalfHourSeries read_series_csv(std::istream& in, std::string sector) {
  const auto table = csv::Table::read(in);
  const auto ts_col = table.column("timestamp");
  const auto val_col = table.column("value");
  HalfHourSeries series;
  series.sector = std::move(sector);
  for (const auto& row : table.rows()) {
    series.grid.push_back(parse_timestamp(row[ts_col]));
    series.values.push_back(csv::parse_number(row[val_col]));
    if (series.grid.size() > 1 && !(series.grid[series.grid.size() - 2] < series.grid.back())) {
      throw DataError(fmt::format("series grid not increasing at {}", row[ts_col]));
    }
  }
  return series;
}

void write_rejects_csv(std::ostream& out, std::span<const RejectEntry> rejects) {
  out << "line,reason\n";
  for (const auto& r : rejects) {
    std::string reason = r.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    out << r.line << ',' << reason << '\n';
  }
}

}  // namespace jsseg
