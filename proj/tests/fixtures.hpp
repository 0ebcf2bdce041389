#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "jsseg/analysis.hpp"
#include "jsseg/calendar.hpp"
#include "jsseg/synth.hpp"

namespace fixture {

using jsseg::Color;
using jsseg::Date;
using jsseg::make_date;

/// A long quiet stretch hiding a mild volatility bump, flanked by wild segments.
/// A single scan of the quiet stretch does not clear a cutoff of 10; the bump's
/// two edges do once both are in place.
inline std::vector<double> context_masking(std::uint64_t seed) {
  const jsseg::synth::Regime regimes[] = {
      {300, 10e-3}, {1000, 1e-3}, {300, 1.35e-3}, {1000, 1e-3}, {300, 10e-3},
  };
  return jsseg::synth::gaussian_regimes(regimes, seed);
}
inline constexpr std::size_t kMaskedEdges[] = {1300, 1600};
/// A seed for which a single scan of the quiet stretch stays below 10.
inline constexpr std::uint64_t kMaskingSeed = 1;

/// Weekday calendar covering the study period.
inline jsseg::TradingCalendar study_calendar() {
  return jsseg::TradingCalendar::weekdays(make_date(2000, 2, 14), make_date(2008, 8, 29));
}

struct Stretch {
  Color color;
  Date from;
};

/// Timeline whose runs start on the first half-hour of each stretch's date.
inline jsseg::PhaseTimeline timeline(const std::string& sector, const jsseg::TradingCalendar& cal,
                                     const std::vector<Stretch>& stretches) {
  const auto grid = cal.grid();
  std::vector<jsseg::Timestamp> base(grid.begin(), grid.end() - 1);
  const auto index_of = [&](Date d) {
    const auto it = std::lower_bound(cal.days.begin(), cal.days.end(), d);
    return static_cast<std::size_t>(it - cal.days.begin()) * cal.samples_per_day;
  };
  std::vector<jsseg::Extent> extents;
  std::vector<Color> colors;
  for (std::size_t i = 0; i < stretches.size(); ++i) {
    const std::size_t b = index_of(stretches[i].from);
    const std::size_t e = i + 1 < stretches.size() ? index_of(stretches[i + 1].from) : base.size();
    extents.push_back({b, e});
    colors.push_back(stretches[i].color);
  }
  return jsseg::build_timeline(sector, extents, colors, base);
}

/// Crisis, one brief early growth spell, a long recovery from 6 Aug 2003,
/// and renewed crisis after growth ends on onset_day.
inline jsseg::PhaseTimeline recovery_onset(const std::string& sector, const jsseg::TradingCalendar& cal,
                                           Date onset_day) {
  const Date next = *std::upper_bound(cal.days.begin(), cal.days.end(), onset_day);
  return timeline(sector, cal,
                  {
                      {Color::orange, make_date(2000, 2, 14)},
                      {Color::blue, make_date(2000, 3, 1)},
                      {Color::orange, make_date(2000, 6, 1)},
                      {Color::green, make_date(2002, 1, 2)},
                      {Color::blue, make_date(2002, 5, 1)},
                      {Color::yellow, make_date(2002, 5, 20)},
                      {Color::blue, make_date(2003, 8, 6)},
                      {Color::black, make_date(2005, 1, 3)},
                      {Color::blue, make_date(2006, 6, 1)},
                      {Color::yellow, next},
                      {Color::blue, make_date(2007, 10, 1)},
                      {Color::red, make_date(2007, 10, 15)},
                  });
}

}  // namespace fixture
