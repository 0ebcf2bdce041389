#include "jsseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

namespace jsseg::synth {

std::vector<double> gaussian_regimes(std::span<const Regime> regimes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x;
  for (const auto& r : regimes) {
    for (std::size_t i = 0; i < r.length; ++i) x.push_back(r.mean + r.sigma * normal(rng));
  }
  return x;
}

std::vector<double> scenario_levels(const SectorScenario& scenario, const TradingCalendar& cal, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> levels;
  levels.reserve(cal.days.size() * cal.samples_per_day);
  double log_level = std::log(scenario.start_level);
  std::size_t step = 0;
  double sigma = scenario.schedule.empty() ? 1e-3 : scenario.schedule.front().sigma;
  for (Date day : cal.days) {
    while (step < scenario.schedule.size() && scenario.schedule[step].from <= day) sigma = scenario.schedule[step++].sigma;
    for (std::size_t k = 0; k < cal.samples_per_day; ++k) {
      if (!levels.empty()) log_level += sigma * normal(rng);
      levels.push_back(std::exp(log_level));
    }
  }
  return levels;
}

void write_ticks(std::ostream& out, const std::string& ric, const TradingCalendar& cal, std::span<const double> levels,
                 std::uint64_t seed, std::size_t ticks_per_interval) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> offset_ms(1, cal.step.count() * 60'000 - 1);
  std::uniform_real_distribution<double> jitter(-5e-4, 5e-4);
  std::bernoulli_distribution rare(0.05);
  const auto line = [&](Timestamp ts, double price) {
    const Date d = date_of(ts);
    const std::chrono::year_month_day ymd{d};
    const auto ms = (ts - d).count();
    out << ric << ',' << fmt::format("{:02d}/{:02d}/{:04d}", static_cast<unsigned>(ymd.month()),
                                     static_cast<unsigned>(ymd.day()), static_cast<int>(ymd.year()))
        << ',' << fmt::format("{:02d}:{:02d}:{:02d}.{:03d}", ms / 3'600'000, ms / 60'000 % 60, ms / 1000 % 60, ms % 1000)
        << ",+0,Index," << fmt::format("{:.6f}", price) << '\n';
  };
  out << "#RIC,Date[G],Time[G],GMT Offset,Type,Price\n";
  std::size_t g = 0;
  for (Date day : cal.days) {
    if (rare(rng)) line(cal.open_utc(day) - std::chrono::minutes{95}, levels[g] * 1.01);
    for (std::size_t k = 0; k < cal.samples_per_day; ++k, ++g) {
      const Timestamp grid = cal.sample_time(day, k);
      // the last tick before each grid time carries the target level
      std::vector<long> offsets(ticks_per_interval);
      for (auto& o : offsets) o = offset_ms(rng);
      std::sort(offsets.begin(), offsets.end());
      offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
      for (std::size_t i = 0; i < offsets.size(); ++i) {
        const Timestamp ts = grid - cal.step + std::chrono::milliseconds{offsets[i]};
        const double price = i + 1 == offsets.size() ? levels[g] : levels[g] * (1.0 + jitter(rng));
        line(ts, price);
      }
    }
    if (rare(rng)) line(cal.close_utc(day) + std::chrono::minutes{3}, levels[g - 1] * 1.001);
  }
}

std::vector<SectorScenario> ten_sector_fixture() {
  const char* codes[] = {"BM", "CY", "EN", "FN", "HC", "IN", "NC", "TC", "TL", "UT"};
  std::vector<SectorScenario> out;
  for (int i = 0; i < 10; ++i) {
    const auto lag = std::chrono::days{3 * i};
    const double scale = 1.0 + 0.05 * i;
    SectorScenario s;
    s.ric = fmt::format(".DJUS{}", codes[i]);
    s.start_level = 100.0 + 10.0 * i;
    s.schedule = {
        {make_date(2000, 1, 1), 2.4e-3 * scale},
        {make_date(2000, 9, 1) + lag, 4.0e-3 * scale},
        {make_date(2001, 1, 15) + lag, 2.4e-3 * scale},
        {make_date(2002, 7, 1) + lag, 6.5e-3 * scale},
        {make_date(2002, 8, 15) + lag, 4.0e-3 * scale},
        {make_date(2002, 10, 1) + lag, 6.5e-3 * scale},
        {make_date(2002, 11, 1) + lag, 2.4e-3 * scale},
        {make_date(2003, 5, 1) + lag * 4, 1.4e-3 * scale},
        {make_date(2004, 2, 1) + lag, 0.8e-3 * scale},
        {make_date(2005, 3, 1) + lag, 1.4e-3 * scale},
        {make_date(2005, 4, 15) + lag, 0.8e-3 * scale},
        {make_date(2007, 3, 1) - lag, 4.0e-3 * scale},
        {make_date(2008, 1, 15) + lag, 11.0e-3 * scale},
        {make_date(2008, 2, 1) + lag, 4.0e-3 * scale},
    };
    out.push_back(std::move(s));
  }
  return out;
}

std::string rate_events_csv() {
  return "date,change,new_rate\n"
         "2000-05-16,0.5,6.5\n"
         "2001-01-03,-0.5,6\n"
         "2001-01-31,-0.5,5.5\n"
         "2001-03-20,-0.5,5\n"
         "2001-04-18,-0.5,4.5\n"
         "2001-05-15,-0.5,4\n"
         "2001-06-27,-0.25,3.75\n"
         "2001-08-21,-0.25,3.5\n"
         "2001-09-17,-0.5,3\n"
         "2001-10-02,-0.5,2.5\n"
         "2001-11-06,-0.5,2\n"
         "2001-12-11,-0.25,1.75\n"
         "2002-11-06,-0.5,1.25\n"
         "2003-06-25,-0.25,1\n"
         "2004-06-30,0.25,1.25\n";
}

}  // namespace jsseg::synth
