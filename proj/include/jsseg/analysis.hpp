#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsseg/cluster.hpp"
#include "jsseg/divergence.hpp"
#include "jsseg/segmenter.hpp"
#include "jsseg/time.hpp"

namespace jsseg {

/// Half-open index range of a segment over the return series.
struct Extent {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Extent> extents_of(const SegmentationResult& result);
std::vector<Extent> extents_of(std::span<const SegmentRow> rows);
/// Boundaries recorded in a segment listing (row m >= 2 carries the boundary before it).
std::vector<Boundary> boundaries_of(std::span<const SegmentRow> rows);

/// Maximal run of same-colored adjacent segments.
struct PhaseRun {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t first_segment = 0;
  std::size_t last_segment = 0;
  Timestamp start;     // time of the first half-hour in the run
  Timestamp end_time;  // time of the last half-hour in the run
  Color color = Color::blue;

  std::size_t duration() const { return end - begin; }
  Phase phase() const { return phase_of(color); }
};

struct PhaseTimeline {
  std::string sector;
  std::vector<PhaseRun> runs;
};

PhaseTimeline build_timeline(std::string sector, std::span<const Extent> segments, std::span<const Color> colors,
                             std::span<const Timestamp> base_grid);

/// 42 trading days of 14 half-hours.
inline constexpr std::size_t kTwoMonths = 588;

struct DatedFinding {
  std::optional<Timestamp> date;
  bool censored = false;
};

struct RecoveryOptions {
  std::size_t min_run = kTwoMonths;
  double predominance = 0.5;  // growth share required over the trailing window
  std::size_t horizon = 0;    // trailing window length; 0 runs to the end of the series
};

/// Start of the first growth run of at least min_run half-hours after which
/// growth occupies more than the predominance share of the trailing window.
DatedFinding detect_recovery(const PhaseTimeline& timeline, const RecoveryOptions& opts = {});

/// End of the last growth run of at least min_run half-hours. Censored when
/// that run is still open at the end of the series.
DatedFinding detect_onset(const PhaseTimeline& timeline, std::size_t min_run = kTwoMonths);

struct Shock {
  std::string sector;
  Color cls = Color::orange;
  std::size_t begin = 0;  // index on the shared half-hour grid
  Timestamp start;
  std::size_t duration = 0;
  std::optional<double> delta;  // divergence of the leading boundary
  std::optional<double> delta_err;
};

/// "high", "very-high", "extremely-high", ...
std::string shock_class_name(Color c);
Color parse_shock_class(const std::string& name);

/// Maximal runs of the class (or of the class and anything above it).
std::vector<Shock> extract_shocks(const PhaseTimeline& timeline, std::span<const Boundary> boundaries, Color cls,
                                  bool at_or_above = false);

struct ShockGroup {
  std::size_t reference = 0;         // median start of the group
  std::vector<Shock> members;        // at most one per sector, ordered by start
  std::vector<std::string> missing;  // sectors without a member
};

/// 20 trading days.
inline constexpr std::size_t kShockWindow = 280;

/// Groups shocks of different sectors whose starts lie within window
/// half-hours of the group's median start.
std::vector<ShockGroup> match_shocks(std::span<const Shock> shocks, std::span<const std::string> sectors,
                                     std::size_t window = kShockWindow);

/// Ranks 1..n with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> values, bool descending = false);
/// Pearson correlation of the average ranks; nullopt for constant input.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct RankRow {
  std::string sector;
  Timestamp start;
  double start_rank = 0.0;     // 1 = earliest
  double duration_rank = 0.0;  // 1 = longest
  std::optional<double> strength_rank;  // 1 = strongest
};

struct RankTable {
  std::vector<RankRow> rows;
  std::optional<double> rho_duration_start;
  std::optional<double> rho_strength_start;
};

RankTable rank_table(const ShockGroup& group);

struct RateEvent {
  Date date;
  double change = 0.0;    // percent
  double new_rate = 0.0;  // percent
};

/// CSV with header date,change,new_rate. Throws DataError if unsorted or if
/// a rate does not follow from its predecessor.
std::vector<RateEvent> read_rate_events(std::istream& in);
void validate_rate_events(std::span<const RateEvent> events);

enum class Response { effective, counter_effective, ineffective };
const char* response_name(Response r);

struct EventResponse {
  std::string sector;
  RateEvent event;
  Response classification = Response::ineffective;
  bool anticipatory = false;
  std::optional<Timestamp> boundary;
  std::optional<Color> from;
  std::optional<Color> to;
};

struct EventWindowOptions {
  std::size_t window_days = 2;
  std::size_t anticipation_days = 5;
};

struct EventAnalysis {
  std::vector<EventResponse> responses;
  std::vector<std::string> warnings;
};

/// Classifies each sector's reaction to each event by the color transition
/// closest to the event within +-window_days trading days.
EventAnalysis classify_event_responses(std::span<const PhaseTimeline> timelines, std::span<const RateEvent> events,
                                       std::span<const Date> trading_days, const EventWindowOptions& opts = {});

void write_plotdata_csv(std::ostream& out, std::span<const PhaseTimeline> timelines);
std::vector<PhaseTimeline> read_plotdata_csv(std::istream& in);
void write_event_markers_csv(std::ostream& out, std::span<const RateEvent> events);

void write_findings_csv(std::ostream& out, std::span<const std::string> sectors, std::span<const DatedFinding> findings);
void write_shocks_csv(std::ostream& out, std::span<const Shock> shocks);
void write_rank_csv(std::ostream& out, std::span<const ShockGroup> groups, std::span<const RankTable> tables);
void write_correlations_csv(std::ostream& out, std::span<const ShockGroup> groups, std::span<const RankTable> tables);
void write_responses_csv(std::ostream& out, std::span<const EventResponse> responses);

}  // namespace jsseg
