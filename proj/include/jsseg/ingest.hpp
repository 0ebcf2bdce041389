#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jsseg/calendar.hpp"
#include "jsseg/time.hpp"

namespace jsseg {

inline constexpr const char* kTickHeader = "#RIC,Date[G],Time[G],GMT Offset,Type,Price";

struct TickRecord {
  std::string ric;
  Timestamp timestamp;  // UTC
  int gmt_offset = 0;   // hours
  std::string kind;
  double price = 0.0;
};

struct RejectEntry {
  std::size_t line = 0;  // 1-based line number in the source file
  std::string reason;
};

struct TickParseResult {
  std::vector<TickRecord> ticks;
  std::vector<RejectEntry> rejects;
};

/// Reads a tick file. The first line must be the header; malformed rows land
/// in the reject log instead of aborting the parse.
TickParseResult parse_ticks(std::istream& in);

/// ".DJUSBM" -> "BM"; other codes are returned without the leading dot.
std::string sector_from_ric(const std::string& ric);

struct HalfHourSeries {
  std::string sector;
  std::vector<Timestamp> grid;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct LogReturnSeries {
  std::string sector;
  std::vector<double> x;                // x[t] = ln X[t+1] - ln X[t]
  std::vector<Timestamp> base_grid;     // left endpoint of each return
};

struct ResampleOptions {
  /// Ticks earlier than open - pre_open_window are exchange corrections and
  /// never contribute. The default admits the tick just before the opening bell.
  std::chrono::minutes pre_open_window{30};
};

struct ResampleResult {
  HalfHourSeries series;
  std::vector<std::string> warnings;
};

/// Samples the last qualifying tick strictly before each grid time. Grid
/// points without a tick that day carry the previous value forward.
ResampleResult resample(std::vector<TickRecord> ticks, const TradingCalendar& cal,
                        const ResampleOptions& opts = {});

LogReturnSeries log_returns(const HalfHourSeries& series);

void write_series_csv(std::ostream& out, const HalfHourSeries& series);
void write_series_json(std::ostream& out, const HalfHourSeries& series);
HalfHourSeries read_series_csv(std::istream& in, std::string sector);
void write_rejects_csv(std::ostream& out, std::span<const RejectEntry> rejects);

}  // namespace jsseg
