#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jsseg/calendar.hpp"
#include "jsseg/time.hpp"

// Seeded synthetic data for tests, benchmarks and the `simulate` subcommand.
namespace jsseg::synth {

struct Regime {
  std::size_t length = 0;
  double sigma = 1e-3;
  double mean = 0.0;
};

/// Concatenated i.i.d. Gaussian stretches.
std::vector<double> gaussian_regimes(std::span<const Regime> regimes, std::uint64_t seed);

/// Volatility switching at calendar dates; sigma applies from `from` onward.
struct VolatilityStep {
  Date from;
  double sigma = 1e-3;
};

struct SectorScenario {
  std::string ric;
  double start_level = 100.0;
  std::vector<VolatilityStep> schedule;  // sorted by date
};

/// Half-hourly index levels following the scenario on the calendar grid.
std::vector<double> scenario_levels(const SectorScenario& scenario, const TradingCalendar& cal, std::uint64_t seed);

/// Writes a tick file whose resampling reproduces `levels` to six decimals. Adds
/// pre-open corrections and post-close prints that resampling must ignore.
void write_ticks(std::ostream& out, const std::string& ric, const TradingCalendar& cal, std::span<const double> levels,
                 std::uint64_t seed, std::size_t ticks_per_interval = 2);

/// Ten sectors sharing a crisis / recovery / crisis schedule with staggered
/// transitions, loosely shaped like 2000-2008.
std::vector<SectorScenario> ten_sector_fixture();

/// Rate events consistent with the fixture period.
std::string rate_events_csv();

}  // namespace jsseg::synth
