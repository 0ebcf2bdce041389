#include "jsseg/commands.hpp"

#include <algorithm>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <omp.h>

#include "jsseg/analysis.hpp"
#include "jsseg/calendar.hpp"
#include "jsseg/cluster.hpp"
#include "jsseg/error.hpp"
#include "jsseg/ingest.hpp"
#include "jsseg/synth.hpp"

namespace fs = std::filesystem;

namespace jsseg {

std::string RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["inputs"] = inputs;
  j["out_dir"] = out_dir;
  j["ingest"] = {{"holidays", holidays},
                 {"start_date", start_date},
                 {"end_date", end_date},
                 {"samples_per_day", samples_per_day},
                 {"pre_open_minutes", pre_open_minutes}};
  j["segment"] = {{"cutoff", segmentation.cutoff},
                  {"min_segment_len", segmentation.min_segment_len},
                  {"long_segment_len", segmentation.long_segment_len},
                  {"refine_floor", segmentation.refine_floor},
                  {"max_opt_iters", segmentation.max_opt_iters}};
  j["cluster"] = {{"k_min", k_min}, {"k_max", k_max}, {"policy", policy}, {"unweighted_volatility", unweighted_volatility}};
  j["analyze"] = {{"events", events},
                  {"min_run", min_run},
                  {"predominance", predominance},
                  {"shock_window", shock_window},
                  {"event_window_days", event_window_days},
                  {"anticipation_days", anticipation_days}};
  j["seed"] = seed;
  j["jobs"] = jobs;
  return j.dump(1) + "\n";
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << content;
}

template <class F>
std::string render(F&& f) {
  std::ostringstream os;
  f(os);
  return os.str();
}

/// "dir/BM.segments.csv" -> "BM"
std::string sector_of(const fs::path& path) {
  const auto name = path.filename().string();
  return name.substr(0, name.find('.'));
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (sector_of(path) + suffix);
}

void prepare_out(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw DataError(fmt::format("cannot create '{}': {}", cfg.out_dir, ec.message()));
}

/// Runs body(i) for every i, optionally in parallel, rethrowing the first
/// failure in index order.
template <class F>
void for_each_sector(const RunConfig& cfg, std::size_t n, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  const int threads = cfg.jobs > 0 ? static_cast<int>(cfg.jobs) : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void require_inputs(const RunConfig& cfg) {
  if (cfg.inputs.empty()) throw std::invalid_argument(fmt::format("{}: no input files", cfg.subcommand));
}

std::vector<std::string> do_ingest(const RunConfig& cfg, std::ostream& log) {
  require_inputs(cfg);
  prepare_out(cfg);
  const std::size_t n = cfg.inputs.size();
  std::vector<TickParseResult> parsed(n);
  for_each_sector(cfg, n, [&](std::size_t i) {
    auto in = open_input(cfg.inputs[i]);
    parsed[i] = parse_ticks(in);
  });

  std::vector<Date> holidays;
  if (!cfg.holidays.empty()) {
    auto in = open_input(cfg.holidays);
    holidays = read_holidays(in);
  }
  Date first = Date::max();
  Date last = Date::min();
  for (const auto& p : parsed) {
    for (const auto& t : p.ticks) {
      first = std::min(first, date_of(t.timestamp));
      last = std::max(last, date_of(t.timestamp));
    }
  }
  if (!cfg.start_date.empty()) first = parse_date(cfg.start_date);
  if (!cfg.end_date.empty()) last = parse_date(cfg.end_date);
  if (first > last) throw DataError("no ticks in any input");
  auto cal = TradingCalendar::weekdays(first, last, holidays);
  cal.samples_per_day = cfg.samples_per_day;
  cal.validate();

  std::vector<std::string> sectors(n);
  std::vector<std::string> messages(n);
  std::vector<nlohmann::ordered_json> entries(n);
  ResampleOptions ropts;
  ropts.pre_open_window = std::chrono::minutes{cfg.pre_open_minutes};
  for_each_sector(cfg, n, [&](std::size_t i) {
    if (parsed[i].ticks.empty()) throw DataError(fmt::format("'{}' contains no valid ticks", cfg.inputs[i]));
    const std::string ric = parsed[i].ticks.front().ric;
    const std::size_t tick_count = parsed[i].ticks.size();
    auto res = resample(std::move(parsed[i].ticks), cal, ropts);
    const auto& s = res.series;
    sectors[i] = s.sector;
    const fs::path base = fs::path(cfg.out_dir) / s.sector;
    write_file(base.string() + ".series.csv", render([&](std::ostream& o) { write_series_csv(o, s); }));
    write_file(base.string() + ".series.json", render([&](std::ostream& o) { write_series_json(o, s); }));
    write_file(base.string() + ".rejects.csv",
               render([&](std::ostream& o) { write_rejects_csv(o, parsed[i].rejects); }));
    entries[i] = {{"sector", s.sector},
                  {"ric", ric},
                  {"source", fs::path(cfg.inputs[i]).filename().string()},
                  {"ticks", tick_count},
                  {"rejects", parsed[i].rejects.size()},
                  {"grid_points", s.size()},
                  {"warnings", res.warnings.size()}};
    messages[i] = fmt::format("ingest {}: {} ticks, {} rejects, {} half-hours, {} warnings\n", s.sector, tick_count,
                              parsed[i].rejects.size(), s.size(), res.warnings.size());
  });
  auto dup = sectors;
  std::sort(dup.begin(), dup.end());
  if (std::adjacent_find(dup.begin(), dup.end()) != dup.end()) throw DataError("two inputs map to the same sector");

  nlohmann::ordered_json manifest;
  manifest["first_day"] = format_date(cal.days.front());
  manifest["last_day"] = format_date(cal.days.back());
  manifest["trading_days"] = cal.days.size();
  manifest["sectors"] = entries;
  write_file(fs::path(cfg.out_dir) / "manifest.json", manifest.dump(1) + "\n");
  for (const auto& m : messages) log << m;
  log << fmt::format("ingest: {} series over {} trading days\n", n, cal.days.size());

  std::vector<std::string> outputs;
  for (const auto& s : sectors) outputs.push_back((fs::path(cfg.out_dir) / (s + ".series.csv")).string());
  return outputs;
}

std::vector<std::string> do_segment(const RunConfig& cfg, std::ostream& log) {
  require_inputs(cfg);
  prepare_out(cfg);
  cfg.segmentation.validate();
  const std::size_t n = cfg.inputs.size();
  std::vector<std::string> messages(n);
  std::vector<std::string> outputs(n);
  for_each_sector(cfg, n, [&](std::size_t i) {
    const fs::path path = cfg.inputs[i];
    const std::string sector = sector_of(path);
    auto in = open_input(path);
    const auto series = read_series_csv(in, sector);
    const auto returns = log_returns(series);
    const auto result = segment_series(returns.x, cfg.segmentation);
    const auto rows = emit_segment_table(result, returns.base_grid);
    const fs::path base = fs::path(cfg.out_dir) / sector;
    write_file(base.string() + ".segments.csv", render([&](std::ostream& o) { write_segment_csv(o, rows); }));
    write_file(base.string() + ".segments.json", render([&](std::ostream& o) {
                 write_segment_json(o, rows, cfg.segmentation, result.converged);
               }));
    const auto refined = std::count(result.flags.begin(), result.flags.end(), BoundaryFlag::refined);
    std::string msg = fmt::format("segment {}: {} returns, {} segments ({} refined boundaries)\n", sector,
                                  returns.x.size(), rows.size(), refined);
    for (const auto& w : result.warnings) msg += fmt::format("warning: {}: {}\n", sector, w);
    messages[i] = std::move(msg);
    outputs[i] = base.string() + ".segments.csv";
  });
  for (const auto& m : messages) log << m;
  return outputs;
}

std::vector<std::string> do_cluster(const RunConfig& cfg, std::ostream& log) {
  require_inputs(cfg);
  prepare_out(cfg);
  const auto policy = parse_policy(cfg.policy);
  if (cfg.k_min > cfg.k_max) throw std::invalid_argument("empty k range");
  const std::size_t n = cfg.inputs.size();
  std::vector<std::string> messages(n);
  std::vector<std::string> outputs(n);
  for_each_sector(cfg, n, [&](std::size_t i) {
    const fs::path path = cfg.inputs[i];
    const std::string sector = sector_of(path);
    auto in = open_input(path);
    const auto rows = read_segment_csv(in);
    if (rows.empty()) throw DataError(fmt::format("'{}' lists no segments", path.string()));
    std::vector<SegmentStats> stats;
    std::vector<std::size_t> starts;
    for (const auto& r : rows) {
      stats.push_back(row_stats(r));
      starts.push_back(r.start);
    }
    std::string msg;
    Dendrogram tree;
    tree.leaves = stats.size();
    Extraction ex;
    ex.policy = policy;
    if (stats.size() < 2) {
      msg += fmt::format("warning: {}: single segment, clustering is degenerate\n", sector);
      ex.assignment.k = 1;
      ex.assignment.cluster_of.assign(stats.size(), 0);
      ex.chosen_k = 1;
    } else {
      tree = complete_link(stats);
      const std::size_t k_max = std::min(cfg.k_max, stats.size());
      const std::size_t k_min = std::min(std::max<std::size_t>(cfg.k_min, 2), k_max);
      if (k_max != cfg.k_max || k_min != cfg.k_min) {
        msg += fmt::format("warning: {}: k range clamped to [{}, {}]\n", sector, k_min, k_max);
      }
      auto use_policy = policy;
      if (policy == ExtractionPolicy::per_branch && stats.size() < 3) use_policy = ExtractionPolicy::uniform;
      ex = extract_clusters(tree, k_min, k_max, use_policy);
    }
    ex.assignment = assign_phases(std::move(ex.assignment), stats, starts,
                                  cfg.unweighted_volatility ? VolatilityWeighting::unweighted
                                                            : VolatilityWeighting::by_length);
    for (const auto& w : ex.assignment.warnings) msg += fmt::format("warning: {}: {}\n", sector, w);
    const fs::path base = fs::path(cfg.out_dir) / sector;
    write_file(base.string() + ".dendrogram.json",
               render([&](std::ostream& o) { write_dendrogram_json(o, tree, ex); }));
    write_file(base.string() + ".merges.csv", render([&](std::ostream& o) { write_merges_csv(o, tree); }));
    write_file(base.string() + ".clusters.csv",
               render([&](std::ostream& o) { write_assignment_csv(o, ex.assignment); }));
    msg = fmt::format("cluster {}: {} segments -> k = {}\n", sector, stats.size(), ex.chosen_k) + msg;
    messages[i] = std::move(msg);
    outputs[i] = path.string();
  });
  for (const auto& m : messages) log << m;
  return outputs;
}

struct SectorInputs {
  std::string sector;
  std::vector<SegmentRow> rows;
  std::vector<Color> colors;
  HalfHourSeries series;
};

void do_analyze(const RunConfig& cfg, std::ostream& log) {
  require_inputs(cfg);
  prepare_out(cfg);
  const std::size_t n = cfg.inputs.size();
  std::vector<SectorInputs> sectors(n);
  for_each_sector(cfg, n, [&](std::size_t i) {
    const fs::path path = cfg.inputs[i];
    auto& s = sectors[i];
    s.sector = sector_of(path);
    {
      auto in = open_input(path);
      s.rows = read_segment_csv(in);
    }
    {
      auto in = open_input(sibling(path, ".clusters.csv"));
      const auto assignment = read_assignment_csv(in);
      if (assignment.size() != s.rows.size()) {
        throw DataError(fmt::format("{}: {} segments but {} cluster rows", s.sector, s.rows.size(), assignment.size()));
      }
      for (const auto& a : assignment) s.colors.push_back(a.color);
    }
    {
      auto in = open_input(sibling(path, ".series.csv"));
      s.series = read_series_csv(in, s.sector);
    }
  });
  std::sort(sectors.begin(), sectors.end(), [](const auto& a, const auto& b) { return a.sector < b.sector; });

  std::vector<std::string> names;
  std::vector<PhaseTimeline> timelines;
  std::vector<DatedFinding> recovery, onset;
  std::vector<Shock> all_shocks;
  std::vector<Date> trading_days;
  RecoveryOptions ropts;
  ropts.min_run = cfg.min_run;
  ropts.predominance = cfg.predominance;
  for (const auto& s : sectors) {
    names.push_back(s.sector);
    const auto returns = log_returns(s.series);
    const auto extents = extents_of(s.rows);
    if (extents.empty() || extents.back().end != returns.x.size()) {
      throw DataError(fmt::format("{}: segment table does not cover the series", s.sector));
    }
    timelines.push_back(build_timeline(s.sector, extents, s.colors, returns.base_grid));
    recovery.push_back(detect_recovery(timelines.back(), ropts));
    onset.push_back(detect_onset(timelines.back(), cfg.min_run));
    const auto boundaries = boundaries_of(s.rows);
    for (Color c : {Color::yellow, Color::orange, Color::red}) {
      auto shocks = extract_shocks(timelines.back(), boundaries, c);
      all_shocks.insert(all_shocks.end(), shocks.begin(), shocks.end());
    }
    for (auto t : s.series.grid) {
      if (trading_days.empty() || trading_days.back() != date_of(t)) trading_days.push_back(date_of(t));
    }
  }
  std::sort(trading_days.begin(), trading_days.end());
  trading_days.erase(std::unique(trading_days.begin(), trading_days.end()), trading_days.end());

  std::vector<ShockGroup> groups;
  std::vector<RankTable> tables;
  for (Color c : {Color::yellow, Color::orange, Color::red}) {
    std::vector<Shock> of_class;
    for (const auto& s : all_shocks) {
      if (s.cls == c) of_class.push_back(s);
    }
    for (auto& g : match_shocks(of_class, names, cfg.shock_window)) {
      tables.push_back(rank_table(g));
      groups.push_back(std::move(g));
    }
  }

  const fs::path out = cfg.out_dir;
  write_file(out / "recovery.csv", render([&](std::ostream& o) { write_findings_csv(o, names, recovery); }));
  write_file(out / "onset.csv", render([&](std::ostream& o) { write_findings_csv(o, names, onset); }));
  write_file(out / "shocks.csv", render([&](std::ostream& o) { write_shocks_csv(o, all_shocks); }));
  write_file(out / "ranks.csv", render([&](std::ostream& o) { write_rank_csv(o, groups, tables); }));
  write_file(out / "rank_correlations.csv", render([&](std::ostream& o) { write_correlations_csv(o, groups, tables); }));
  write_file(out / "plotdata.csv", render([&](std::ostream& o) { write_plotdata_csv(o, timelines); }));

  if (cfg.events.empty()) {
    log << "analyze: no events file, rate-event analysis skipped\n";
  } else {
    auto in = open_input(cfg.events);
    const auto events = read_rate_events(in);
    EventWindowOptions eopts;
    eopts.window_days = cfg.event_window_days;
    eopts.anticipation_days = cfg.anticipation_days;
    const auto analysis = classify_event_responses(timelines, events, trading_days, eopts);
    write_file(out / "event_responses.csv",
               render([&](std::ostream& o) { write_responses_csv(o, analysis.responses); }));
    write_file(out / "plot_events.csv", render([&](std::ostream& o) { write_event_markers_csv(o, events); }));
    for (const auto& w : analysis.warnings) log << "warning: " << w << '\n';
    log << fmt::format("analyze: {} event responses\n", analysis.responses.size());
  }
  log << fmt::format("analyze: {} sectors, {} shocks in {} groups\n", sectors.size(), all_shocks.size(), groups.size());
}

void write_config(const RunConfig& cfg) {
  prepare_out(cfg);
  write_file(fs::path(cfg.out_dir) / "run_config.json", cfg.to_json());
}

}  // namespace

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  write_config(cfg);
  do_ingest(cfg, log);
}

void cmd_segment(const RunConfig& cfg, std::ostream& log) {
  write_config(cfg);
  do_segment(cfg, log);
}

void cmd_cluster(const RunConfig& cfg, std::ostream& log) {
  write_config(cfg);
  do_cluster(cfg, log);
}

void cmd_analyze(const RunConfig& cfg, std::ostream& log) {
  write_config(cfg);
  do_analyze(cfg, log);
}

void cmd_pipeline(const RunConfig& cfg, std::ostream& log) {
  write_config(cfg);
  RunConfig stage = cfg;
  stage.inputs = do_ingest(stage, log);
  stage.inputs = do_segment(stage, log);
  stage.inputs = do_cluster(stage, log);
  do_analyze(stage, log);
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  write_config(cfg);
  const Date first = cfg.start_date.empty() ? make_date(2000, 2, 14) : parse_date(cfg.start_date);
  const Date last = cfg.end_date.empty() ? make_date(2008, 8, 29) : parse_date(cfg.end_date);
  auto cal = TradingCalendar::weekdays(first, last);
  cal.samples_per_day = cfg.samples_per_day;
  const auto scenarios = synth::ten_sector_fixture();
  for_each_sector(cfg, scenarios.size(), [&](std::size_t i) {
    const auto levels = synth::scenario_levels(scenarios[i], cal, cfg.seed + i);
    const auto path = fs::path(cfg.out_dir) / (sector_from_ric(scenarios[i].ric) + ".ticks.csv");
    write_file(path, render([&](std::ostream& o) {
                 synth::write_ticks(o, scenarios[i].ric, cal, levels, cfg.seed * 7919 + i);
               }));
  });
  write_file(fs::path(cfg.out_dir) / "events.csv", synth::rate_events_csv());
  log << fmt::format("simulate: {} tick files over {} trading days\n", scenarios.size(), cal.days.size());
}

int run_command(const RunConfig& cfg, std::ostream& log, std::ostream& err) {
  try {
    if (cfg.subcommand == "ingest") cmd_ingest(cfg, log);
    else if (cfg.subcommand == "segment") cmd_segment(cfg, log);
    else if (cfg.subcommand == "cluster") cmd_cluster(cfg, log);
    else if (cfg.subcommand == "analyze") cmd_analyze(cfg, log);
    else if (cfg.subcommand == "pipeline") cmd_pipeline(cfg, log);
    else if (cfg.subcommand == "simulate") cmd_simulate(cfg, log);
    else {
      err << fmt::format("unknown subcommand '{}'\n", cfg.subcommand);
      return kExitUsage;
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace jsseg
