#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "jsseg/time.hpp"

namespace jsseg {

/// Offset of local exchange time from UTC on a given date (local = UTC + offset).
using UtcOffsetRule = std::function<std::chrono::minutes(Date)>;

/// US Eastern time with the 1987-2006 and 2007+ daylight-saving rules.
std::chrono::minutes us_eastern_offset(Date day);

/// Trading days and the intraday sampling grid. Sample k of a day sits at
/// open + k * step local time; the last sample is the close.
struct TradingCalendar {
  std::vector<Date> days;  // strictly increasing
  std::size_t samples_per_day = 14;
  std::chrono::minutes open{9 * 60 + 30};
  std::chrono::minutes step{30};
  UtcOffsetRule utc_offset = us_eastern_offset;

  /// Weekdays in [first, last] minus the holidays.
  static TradingCalendar weekdays(Date first, Date last, std::span<const Date> holidays = {});

  std::chrono::minutes close() const { return open + step * static_cast<int>(samples_per_day - 1); }
  Timestamp open_utc(Date day) const;
  Timestamp close_utc(Date day) const;
  Timestamp sample_time(Date day, std::size_t k) const;

  /// All sample times, day-major. Length == samples_per_day * days.size().
  std::vector<Timestamp> grid() const;

  void validate() const;
};

/// One ISO date per line; blank lines and lines starting with '#' are skipped.
std::vector<Date> read_holidays(std::istream& in);

}  // namespace jsseg
