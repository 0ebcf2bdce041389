#include "jsseg/calendar.hpp"

#include <algorithm>
#include <istream>
#include <string>

#include <fmt/format.h>

#include "jsseg/error.hpp"

namespace jsseg {

namespace {

using namespace std::chrono;

Date nth_sunday(int y, unsigned m, unsigned n) {
  return Date{year{y} / month{m} / weekday_indexed{Sunday, n}};
}

Date last_sunday(int y, unsigned m) { return Date{year{y} / month{m} / weekday_last{Sunday}}; }

}  // namespace

std::chrono::minutes us_eastern_offset(Date day) {
  const int y = static_cast<int>(year_month_day{day}.year());
  Date dst_start;
  Date dst_end;
  if (y >= 2007) {
    dst_start = nth_sunday(y, 3, 2);
    dst_end = nth_sunday(y, 11, 1);
  } else {
    dst_start = nth_sunday(y, 4, 1);
    dst_end = last_sunday(y, 10);
  }
  const bool dst = day >= dst_start && day < dst_end;
  return dst ? minutes{-4 * 60} : minutes{-5 * 60};
}

TradingCalendar TradingCalendar::weekdays(Date first, Date last, std::span<const Date> holidays) {
  TradingCalendar cal;
  std::vector<Date> skip(holidays.begin(), holidays.end());
  std::sort(skip.begin(), skip.end());
  for (Date d = first; d <= last; d += std::chrono::days{1}) {
    const weekday wd{d};
    if (wd == Saturday || wd == Sunday) continue;
    if (std::binary_search(skip.begin(), skip.end(), d)) continue;
    cal.days.push_back(d);
  }
  return cal;
}

Timestamp TradingCalendar::open_utc(Date day) const {
  return Timestamp{day} + open - utc_offset(day);
}

Timestamp TradingCalendar::close_utc(Date day) const {
  return Timestamp{day} + close() - utc_offset(day);
}

Timestamp TradingCalendar::sample_time(Date day, std::size_t k) const {
  return open_utc(day) + step * static_cast<int>(k);
}

std::vector<Timestamp> TradingCalendar::grid() const {
  std::vector<Timestamp> out;
  out.reserve(days.size() * samples_per_day);
  for (Date d : days) {
    const auto base = open_utc(d);
    for (std::size_t k = 0; k < samples_per_day; ++k) out.push_back(base + step * static_cast<int>(k));
  }
  return out;
}

void TradingCalendar::validate() const {
  if (samples_per_day < 1) throw DataError("samples_per_day must be positive");
  if (step <= minutes{0}) throw DataError("sampling step must be positive");
  if (close() >= hours{24}) throw DataError("trading session runs past midnight");
  for (std::size_t i = 1; i < days.size(); ++i) {
    if (!(days[i - 1] < days[i])) {
      throw DataError(fmt::format("trading days not strictly increasing at {}", format_date(days[i])));
    }
  }
}

std::vector<Date> read_holidays(std::istream& in) {
  std::vector<Date> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(parse_date(line));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace jsseg
