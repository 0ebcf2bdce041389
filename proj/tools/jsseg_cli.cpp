#include <iostream>

#include <CLI11.hpp>

#include "jsseg/commands.hpp"

namespace {

void add_common(CLI::App* sub, jsseg::RunConfig& cfg) {
  sub->add_option("--out,-o", cfg.out_dir, "output directory");
  sub->add_option("--jobs,-j", cfg.jobs, "worker threads (0 = default)");
  sub->add_option("--seed", cfg.seed, "seed for generated data");
}

void add_ingest(CLI::App* sub, jsseg::RunConfig& cfg) {
  sub->add_option("--holidays", cfg.holidays, "file of ISO holiday dates");
  sub->add_option("--start-date", cfg.start_date, "first trading day (ISO)");
  sub->add_option("--end-date", cfg.end_date, "last trading day (ISO)");
  sub->add_option("--samples-per-day", cfg.samples_per_day, "grid points per day");
  sub->add_option("--pre-open", cfg.pre_open_minutes, "minutes before the open a tick still counts");
}

void add_segment(CLI::App* sub, jsseg::RunConfig& cfg) {
  auto& s = cfg.segmentation;
  sub->add_option("--cutoff", s.cutoff, "significance cutoff");
  sub->add_option("--min-seg", s.min_segment_len, "minimum segment length");
  sub->add_option("--long-seg", s.long_segment_len, "segments longer than this are refined");
  sub->add_option("--refine-floor", s.refine_floor, "lowest local cutoff during refinement");
  sub->add_option("--max-opt-iters", s.max_opt_iters, "boundary optimization sweep limit");
}

void add_cluster(CLI::App* sub, jsseg::RunConfig& cfg) {
  sub->add_option("--k-min", cfg.k_min, "smallest cluster count");
  sub->add_option("--k-max", cfg.k_max, "largest cluster count");
  sub->add_option("--policy", cfg.policy, "uniform | per-branch")->check(CLI::IsMember({"uniform", "per-branch"}));
  sub->add_flag("--unweighted", cfg.unweighted_volatility, "rank clusters by unweighted mean stdev");
}

void add_analyze(CLI::App* sub, jsseg::RunConfig& cfg) {
  sub->add_option("--events", cfg.events, "rate events CSV");
  sub->add_option("--min-run", cfg.min_run, "minimum growth run in half-hours");
  sub->add_option("--predominance", cfg.predominance, "growth share for recovery");
  sub->add_option("--shock-window", cfg.shock_window, "shock matching window in half-hours");
  sub->add_option("--event-window", cfg.event_window_days, "trading days around an event");
  sub->add_option("--anticipation", cfg.anticipation_days, "trading days before an event counted as anticipation");
}

}  // namespace

int main(int argc, char** argv) {
  jsseg::RunConfig cfg;
  CLI::App app{"Volatility segmentation and phase analysis of sector index ticks"};
  app.set_config("--config", "", "TOML/INI file with option defaults");
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "tick files -> half-hourly series");
  auto* segment = app.add_subcommand("segment", "series -> segment tables");
  auto* cluster = app.add_subcommand("cluster", "segment tables -> dendrograms and phases");
  auto* analyze = app.add_subcommand("analyze", "segment tables with phases -> findings");
  auto* pipeline = app.add_subcommand("pipeline", "tick files -> findings");
  auto* simulate = app.add_subcommand("simulate", "write a synthetic ten-sector tick fixture");

  for (auto* sub : {ingest, segment, cluster, analyze, pipeline}) {
    sub->add_option("inputs", cfg.inputs, "input files")->required();
  }
  for (auto* sub : {ingest, segment, cluster, analyze, pipeline, simulate}) add_common(sub, cfg);
  add_ingest(ingest, cfg);
  add_ingest(pipeline, cfg);
  simulate->add_option("--start-date", cfg.start_date, "first trading day (ISO)");
  simulate->add_option("--end-date", cfg.end_date, "last trading day (ISO)");
  add_segment(segment, cfg);
  add_segment(pipeline, cfg);
  add_cluster(cluster, cfg);
  add_cluster(pipeline, cfg);
  add_analyze(analyze, cfg);
  add_analyze(pipeline, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? jsseg::kExitOk : jsseg::kExitUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();
  return jsseg::run_command(cfg, std::cout, std::cerr);
}
