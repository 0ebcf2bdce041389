#include "jsseg/time.hpp"

#include <charconv>

#include <fmt/format.h>

#include "jsseg/error.hpp"

namespace jsseg {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw DataError(fmt::format("invalid {} '{}'", what, text));
  }
  return value;
}

Date checked_date(int y, int m, int d, std::string_view text) {
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (m < 1 || d < 1 || !ymd.ok()) throw DataError(fmt::format("invalid date '{}'", text));
  return Date{ymd};
}

}  // namespace

Date make_date(int year, unsigned month, unsigned day) {
  return Date{std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}};
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::string format_timestamp(Timestamp ts) {
  const Date day = date_of(ts);
  const auto ms = (ts - day).count();
  const auto h = ms / 3'600'000;
  const auto m = ms / 60'000 % 60;
  const auto s = ms / 1000 % 60;
  return fmt::format("{}T{:02d}:{:02d}:{:02d}.{:03d}Z", format_date(day), h, m, s, ms % 1000);
}

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError(fmt::format("invalid date '{}'", text));
  }
  return checked_date(parse_int(text.substr(0, 4), "year"), parse_int(text.substr(5, 2), "month"),
                      parse_int(text.substr(8, 2), "day"), text);
}

Date parse_us_date(std::string_view text) {
  if (text.size() != 10 || text[2] != '/' || text[5] != '/') {
    throw DataError(fmt::format("invalid date '{}'", text));
  }
  return checked_date(parse_int(text.substr(6, 4), "year"), parse_int(text.substr(0, 2), "month"),
                      parse_int(text.substr(3, 2), "day"), text);
}

std::chrono::milliseconds parse_time_of_day(std::string_view text) {
  if (text.size() < 8 || text[2] != ':' || text[5] != ':') {
    throw DataError(fmt::format("invalid time '{}'", text));
  }
  const int h = parse_int(text.substr(0, 2), "hour");
  const int m = parse_int(text.substr(3, 2), "minute");
  const int s = parse_int(text.substr(6, 2), "second");
  int ms = 0;
  if (text.size() > 8) {
    if (text[8] != '.' || text.size() != 12) throw DataError(fmt::format("invalid time '{}'", text));
    ms = parse_int(text.substr(9, 3), "millisecond");
  }
  if (h > 23 || m > 59 || s > 60 || h < 0 || m < 0 || s < 0 || ms < 0) {
    throw DataError(fmt::format("invalid time '{}'", text));
  }
  return std::chrono::hours{h} + std::chrono::minutes{m} + std::chrono::seconds{s} +
         std::chrono::milliseconds{ms};
}

Timestamp parse_timestamp(std::string_view text) {
  if (text.size() < 19 || text[10] != 'T') throw DataError(fmt::format("invalid timestamp '{}'", text));
  if (text.back() == 'Z') text.remove_suffix(1);
  return Timestamp{parse_date(text.substr(0, 10))} + parse_time_of_day(text.substr(11));
}

}  // namespace jsseg
