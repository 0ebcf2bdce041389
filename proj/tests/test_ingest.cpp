#include <cmath>
#include <sstream>

#include <doctest.h>

#include "jsseg/calendar.hpp"
#include "jsseg/error.hpp"
#include "jsseg/ingest.hpp"

using namespace jsseg;
using namespace std::chrono_literals;

namespace {

const char* kTable2 =
    "#RIC,Date[G],Time[G],GMT Offset,Type,Price\n"
    ".DJUSBM,02/14/2000,11:54:20.434,+0,Index,149.92\n"
    ".DJUSBM,02/14/2000,14:25:50.259,+0,Index,149.92\n"
    ".DJUSBM,02/14/2000,14:30:29.829,+0,Index,149.93\n"
    ".DJUSBM,02/14/2000,14:30:57.532,+0,Index,149.92\n"
    ".DJUSBM,02/14/2000,14:31:28.710,+0,Index,149.93\n"
    ".DJUSBM,02/14/2000,14:36:59.389,+0,Index,150.19\n";

TickParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_ticks(in);
}

TickRecord tick(Timestamp ts, double price) { return {".DJUSBM", ts, 0, "Index", price}; }

Timestamp at(Date d, std::chrono::milliseconds tod) { return Timestamp{d} + tod; }

}  // namespace

TEST_CASE("parse_ticks reads the tick format") {
  const auto r = parse(kTable2);
  REQUIRE(r.rejects.empty());
  REQUIRE(r.ticks.size() == 6);
  const auto& t = r.ticks[2];
  CHECK(t.ric == ".DJUSBM");
  CHECK(format_timestamp(t.timestamp) == "2000-02-14T14:30:29.829Z");
  CHECK(t.gmt_offset == 0);
  CHECK(t.kind == "Index");
  CHECK(t.price == 149.93);
}

TEST_CASE("parse_ticks logs malformed rows with their line numbers") {
  const auto r = parse(
      "#RIC,Date[G],Time[G],GMT Offset,Type,Price\n"
      ".DJUSBM,02/14/2000,14:30:29.829,+0,Index,abc\n"
      ".DJUSBM,02/30/2000,14:30:29.829,+0,Index,1\n"
      ".DJUSBM,02/14/2000,25:30:29.829,+0,Index,1\n"
      ".DJUSBM,02/14/2000,14:30:29.829,+0,Index,-3\n"
      ".DJUSBM,02/14/2000,14:30:29.829\n"
      ".DJUSBM,02/14/2000,14:30:29.829,+0,Index,150\n");
  CHECK(r.ticks.size() == 1);
  REQUIRE(r.rejects.size() == 5);
  CHECK(r.rejects[0].line == 2);
  CHECK(r.rejects[4].line == 6);
}

TEST_CASE("parse_ticks requires the header") {
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse(".DJUSBM,02/14/2000,14:30:29.829,+0,Index,150\n"), DataError);
  CHECK(parse("#RIC,Date[G],Time[G],GMT Offset,Type,Price\n").ticks.empty());
}

TEST_CASE("sector codes") {
  CHECK(sector_from_ric(".DJUSBM") == "BM");
  CHECK(sector_from_ric(".DJUSUT") == "UT");
  CHECK(sector_from_ric("XYZ") == "XYZ");
}

TEST_CASE("US eastern offset follows both daylight-saving regimes") {
  CHECK(us_eastern_offset(make_date(2000, 2, 14)) == -300min);
  CHECK(us_eastern_offset(make_date(2000, 4, 1)) == -300min);
  CHECK(us_eastern_offset(make_date(2000, 4, 2)) == -240min);
  CHECK(us_eastern_offset(make_date(2000, 10, 28)) == -240min);
  CHECK(us_eastern_offset(make_date(2000, 10, 29)) == -300min);
  CHECK(us_eastern_offset(make_date(2007, 3, 10)) == -300min);
  CHECK(us_eastern_offset(make_date(2007, 3, 11)) == -240min);
  CHECK(us_eastern_offset(make_date(2007, 11, 3)) == -240min);
  CHECK(us_eastern_offset(make_date(2007, 11, 4)) == -300min);
}

TEST_CASE("calendar grid") {
  auto cal = TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2000, 2, 20));
  CHECK(cal.days.size() == 5);
  const auto grid = cal.grid();
  CHECK(grid.size() == 14 * 5);
  CHECK(format_timestamp(grid.front()) == "2000-02-14T14:30:00.000Z");
  CHECK(format_timestamp(grid[13]) == "2000-02-14T21:00:00.000Z");
  CHECK(std::is_sorted(grid.begin(), grid.end()));

  const auto summer = TradingCalendar::weekdays(make_date(2000, 7, 3), make_date(2000, 7, 3));
  CHECK(format_timestamp(summer.grid().front()) == "2000-07-03T13:30:00.000Z");
  CHECK(format_timestamp(summer.grid().back()) == "2000-07-03T20:00:00.000Z");
}

TEST_CASE("holidays are removed from the calendar") {
  std::istringstream in("# US market holidays\n2000-02-21\n\n2000-04-21\n");
  const auto holidays = read_holidays(in);
  REQUIRE(holidays.size() == 2);
  const auto cal = TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2000, 2, 25), holidays);
  CHECK(cal.days.size() == 9);
  CHECK(std::find(cal.days.begin(), cal.days.end(), make_date(2000, 2, 21)) == cal.days.end());
}

TEST_CASE("resample takes the last tick before the opening bell") {
  auto ticks = parse(kTable2).ticks;
  const auto cal = TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2000, 2, 14));
  const auto r = resample(ticks, cal);
  REQUIRE(r.series.size() == 14);
  CHECK(r.series.sector == "BM");
  CHECK(r.series.values[0] == 149.92);
  CHECK(r.series.values[1] == 150.19);
  CHECK(r.series.values[13] == 150.19);
}

TEST_CASE("a tick exactly on a grid time counts for the next grid point") {
  const Date d = make_date(2000, 2, 14);
  const auto cal = TradingCalendar::weekdays(d, d);
  std::vector<TickRecord> ticks = {tick(at(d, 14h + 20min), 100.0), tick(at(d, 15h), 101.0)};
  const auto r = resample(ticks, cal);
  CHECK(r.series.values[0] == 100.0);
  CHECK(r.series.values[1] == 100.0);
  CHECK(r.series.values[2] == 101.0);
}

TEST_CASE("post-close prints and early corrections are ignored") {
  const Date d1 = make_date(2000, 2, 14);
  const Date d2 = make_date(2000, 2, 15);
  const auto cal = TradingCalendar::weekdays(d1, d2);
  std::vector<TickRecord> ticks = {
      tick(at(d1, 14h + 29min), 100.0),
      tick(at(d1, 20h + 59min), 101.0),
      tick(at(d1, 21h + 3min), 101.1),
      tick(at(d2, 12h + 30min), 99.0),
      tick(at(d2, 14h + 45min), 102.0),
  };
  const auto r = resample(ticks, cal);
  CHECK(r.series.values[13] == 101.0);
  CHECK(r.series.values[14] == 101.0);
  CHECK(r.series.values[15] == 102.0);
  for (double v : r.series.values) {
    CHECK(v != 101.1);
    CHECK(v != 99.0);
  }
}

TEST_CASE("an empty trading day is carried forward with a warning") {
  const Date d1 = make_date(2000, 2, 14);
  const auto cal = TradingCalendar::weekdays(d1, make_date(2000, 2, 16));
  std::vector<TickRecord> ticks = {tick(at(d1, 20h), 100.0), tick(at(make_date(2000, 2, 16), 15h), 103.0)};
  const auto r = resample(ticks, cal);
  REQUIRE(r.warnings.size() >= 1);
  CHECK(r.warnings[0].find("2000-02-15") != std::string::npos);
  for (std::size_t g = 14; g < 28; ++g) CHECK(r.series.values[g] == 100.0);
  CHECK(r.series.size() == 42);
}

TEST_CASE("resample rejects an empty tick set") {
  const auto cal = TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2000, 2, 14));
  CHECK_THROWS_AS(resample({}, cal), DataError);
}

TEST_CASE("resample sorts its input") {
  const Date d = make_date(2000, 2, 14);
  const auto cal = TradingCalendar::weekdays(d, d);
  std::vector<TickRecord> ticks = {tick(at(d, 14h + 50min), 2.0), tick(at(d, 14h + 40min), 1.0)};
  CHECK(resample(ticks, cal).series.values[1] == 2.0);
}

TEST_CASE("resample is idempotent on its own output") {
  const auto cal = TradingCalendar::weekdays(make_date(2000, 3, 1), make_date(2000, 4, 10));
  std::vector<TickRecord> ticks;
  double p = 100.0;
  for (auto g : cal.grid()) {
    ticks.push_back(tick(g - 7min, p));
    p *= 1.001;
  }
  const auto first = resample(ticks, cal).series;
  std::vector<TickRecord> again;
  for (std::size_t i = 0; i < first.size(); ++i) again.push_back(tick(first.grid[i] - 1ms, first.values[i]));
  CHECK(resample(again, cal).series.values == first.values);
}

TEST_CASE("log returns") {
  HalfHourSeries s;
  const auto cal = TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2000, 2, 14));
  const auto grid = cal.grid();
  s.grid.assign(grid.begin(), grid.begin() + 3);

  s.values = {100, 100, 100};
  CHECK(log_returns(s).x == std::vector<double>{0.0, 0.0});

  s.values = {100, 110, 110};
  CHECK(log_returns(s).x[0] == doctest::Approx(0.0953102).epsilon(1e-6));

  s.values = {149.92, 149.93, 149.92};
  const auto r = log_returns(s);
  CHECK(r.x[0] == doctest::Approx(6.670e-5).epsilon(1e-3));
  CHECK(r.x[1] == doctest::Approx(-6.670e-5).epsilon(1e-3));
  CHECK(r.base_grid.size() == 2);
  CHECK(r.base_grid[1] == grid[1]);

  s.values = {100, 0, 100};
  try {
    log_returns(s);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2000-02-14T15:00:00.000Z") != std::string::npos);
  }
}

TEST_CASE("cumulative log returns reproduce the levels") {
  const auto cal = TradingCalendar::weekdays(make_date(2001, 1, 1), make_date(2001, 6, 1));
  HalfHourSeries s;
  s.grid = cal.grid();
  double p = 1234.5;
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    s.values.push_back(p);
    p *= 1.0 + 0.003 * std::sin(0.37 * static_cast<double>(i));
  }
  const auto r = log_returns(s);
  double cum = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    cum += r.x[i];
    const double back = s.values[0] * std::exp(cum);
    CHECK(std::abs(back - s.values[i + 1]) / s.values[i + 1] < 1e-12);
  }
}

TEST_CASE("series CSV round trip") {
  const auto cal = TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2000, 2, 15));
  HalfHourSeries s;
  s.sector = "BM";
  s.grid = cal.grid();
  for (std::size_t i = 0; i < s.grid.size(); ++i) s.values.push_back(149.92 + 0.01 * static_cast<double>(i) / 3.0);
  std::stringstream io;
  write_series_csv(io, s);
  const auto back = read_series_csv(io, "BM");
  CHECK(back.grid == s.grid);
  CHECK(back.values == s.values);
}
