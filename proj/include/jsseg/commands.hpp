#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jsseg/segmenter.hpp"

namespace jsseg {

/// Every knob of a run. Each subcommand writes the resolved values to
/// run_config.json next to its outputs.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string out_dir = "out";

  // ingest
  std::string holidays;
  std::string start_date;  // ISO; empty = first tick date
  std::string end_date;
  std::size_t samples_per_day = 14;
  int pre_open_minutes = 30;

  // segment
  SegmentationConfig segmentation;

  // cluster
  std::size_t k_min = 4;
  std::size_t k_max = 6;
  std::string policy = "uniform";
  bool unweighted_volatility = false;

  // analyze
  std::string events;
  std::size_t min_run = 588;
  double predominance = 0.5;
  std::size_t shock_window = 280;
  std::size_t event_window_days = 2;
  std::size_t anticipation_days = 5;

  std::uint64_t seed = 1;
  std::size_t jobs = 0;  // 0 = OpenMP default

  std::string to_json() const;
};

/// Exit codes: 0 ok, 1 usage, 2 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Each command throws DataError for bad inputs and std::invalid_argument
/// for bad configuration; run_command maps both to exit codes.
void cmd_ingest(const RunConfig& cfg, std::ostream& log);
void cmd_segment(const RunConfig& cfg, std::ostream& log);
void cmd_cluster(const RunConfig& cfg, std::ostream& log);
void cmd_analyze(const RunConfig& cfg, std::ostream& log);
void cmd_pipeline(const RunConfig& cfg, std::ostream& log);
void cmd_simulate(const RunConfig& cfg, std::ostream& log);

int run_command(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace jsseg
