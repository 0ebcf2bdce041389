#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace jsseg {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Date = std::chrono::sys_days;

Date make_date(int year, unsigned month, unsigned day);

/// "2000-02-14T14:30:00.000Z"
std::string format_timestamp(Timestamp ts);
/// "2000-02-14"
std::string format_date(Date d);

/// Accepts "YYYY-MM-DDTHH:MM:SS[.mmm][Z]". Throws DataError.
Timestamp parse_timestamp(std::string_view text);
/// Accepts "YYYY-MM-DD". Throws DataError.
Date parse_date(std::string_view text);

/// Tick-file fields: "MM/DD/YYYY" and "HH:MM:SS.SSS".
Date parse_us_date(std::string_view text);
std::chrono::milliseconds parse_time_of_day(std::string_view text);

inline Date date_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

}  // namespace jsseg
