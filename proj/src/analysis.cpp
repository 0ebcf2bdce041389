#include "jsseg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "jsseg/csv.hpp"
#include "jsseg/error.hpp"

namespace jsseg {

std::vector<Extent> extents_of(const SegmentationResult& result) {
  std::vector<Extent> out;
  for (const auto& s : result.segments) out.push_back({s.begin, s.end});
  return out;
}

std::vector<Extent> extents_of(std::span<const SegmentRow> rows) {
  std::vector<Extent> out;
  for (const auto& r : rows) out.push_back({r.start - 1, r.end});
  return out;
}

std::vector<Boundary> boundaries_of(std::span<const SegmentRow> rows) {
  std::vector<Boundary> out;
  for (std::size_t m = 1; m < rows.size(); ++m) {
    Boundary b;
    b.position = rows[m].start - 1;
    b.divergence = rows[m].delta.value_or(0.0);
    b.divergence_err = rows[m].delta_err.value_or(0.0);
    b.left_len = rows[m - 1].duration;
    b.right_len = rows[m].duration;
    out.push_back(b);
  }
  return out;
}

PhaseTimeline build_timeline(std::string sector, std::span<const Extent> segments, std::span<const Color> colors,
                             std::span<const Timestamp> base_grid) {
  if (segments.size() != colors.size()) throw std::invalid_argument("segments and colors differ in size");
  PhaseTimeline tl;
  tl.sector = std::move(sector);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    if (seg.end <= seg.begin || seg.end > base_grid.size()) throw std::invalid_argument("segment outside the grid");
    if (i > 0 && seg.begin != segments[i - 1].end) throw std::invalid_argument("segments do not tile the series");
    if (!tl.runs.empty() && tl.runs.back().color == colors[i]) {
      auto& run = tl.runs.back();
      run.end = seg.end;
      run.last_segment = i;
      run.end_time = base_grid[seg.end - 1];
      continue;
    }
    PhaseRun run;
    run.begin = seg.begin;
    run.end = seg.end;
    run.first_segment = i;
    run.last_segment = i;
    run.start = base_grid[seg.begin];
    run.end_time = base_grid[seg.end - 1];
    run.color = colors[i];
    tl.runs.push_back(run);
  }
  return tl;
}

DatedFinding detect_recovery(const PhaseTimeline& tl, const RecoveryOptions& opts) {
  if (tl.runs.empty()) return {};
  const std::size_t span_end = tl.runs.back().end;
  for (const auto& run : tl.runs) {
    if (run.phase() != Phase::growth || run.duration() < opts.min_run) continue;
    const std::size_t stop = opts.horizon == 0 ? span_end : std::min(span_end, run.begin + opts.horizon);
    std::size_t growth = 0;
    for (const auto& other : tl.runs) {
      if (other.phase() != Phase::growth) continue;
      const auto lo = std::max(other.begin, run.begin);
      const auto hi = std::min(other.end, stop);
      if (hi > lo) growth += hi - lo;
    }
    const double share = static_cast<double>(growth) / static_cast<double>(stop - run.begin);
    if (share > opts.predominance) return {run.start, false};
  }
  return {};
}

DatedFinding detect_onset(const PhaseTimeline& tl, std::size_t min_run) {
  for (std::size_t r = tl.runs.size(); r-- > 0;) {
    const auto& run = tl.runs[r];
    if (run.phase() == Phase::growth && run.duration() >= min_run) {
      return {run.end_time, r + 1 == tl.runs.size()};
    }
  }
  return {};
}

std::string shock_class_name(Color c) {
  std::string name = volatility_class(c);
  std::replace(name.begin(), name.end(), ' ', '-');
  return name;
}

Color parse_shock_class(const std::string& name) {
  for (int i = 0; i < static_cast<int>(kLadderSize); ++i) {
    const auto c = static_cast<Color>(i);
    if (name == shock_class_name(c) || name == color_name(c)) return c;
  }
  throw std::invalid_argument(fmt::format("unknown volatility class '{}'", name));
}

std::vector<Shock> extract_shocks(const PhaseTimeline& tl, std::span<const Boundary> boundaries, Color cls,
                                  bool at_or_above) {
  const auto matches = [&](Color c) { return at_or_above ? c >= cls : c == cls; };
  std::vector<Shock> out;
  for (std::size_t r = 0; r < tl.runs.size(); ++r) {
    if (!matches(tl.runs[r].color)) continue;
    std::size_t last = r;
    while (last + 1 < tl.runs.size() && matches(tl.runs[last + 1].color)) ++last;
    Shock s;
    s.sector = tl.sector;
    s.cls = cls;
    s.begin = tl.runs[r].begin;
    s.start = tl.runs[r].start;
    s.duration = tl.runs[last].end - tl.runs[r].begin;
    auto it = std::lower_bound(boundaries.begin(), boundaries.end(), s.begin,
                               [](const Boundary& b, std::size_t pos) { return b.position < pos; });
    if (it != boundaries.end() && it->position == s.begin) {
      s.delta = it->divergence;
      s.delta_err = it->divergence_err;
    }
    out.push_back(std::move(s));
    r = last;
  }
  return out;
}

std::vector<ShockGroup> match_shocks(std::span<const Shock> shocks, std::span<const std::string> sectors,
                                     std::size_t window) {
  std::vector<std::size_t> order(shocks.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (shocks[a].begin != shocks[b].begin) return shocks[a].begin < shocks[b].begin;
    return shocks[a].sector < shocks[b].sector;
  });
  std::vector<char> taken(shocks.size(), 0);
  const auto distance = [](std::size_t a, std::size_t b) { return a > b ? a - b : b - a; };

  // closest untaken shock per sector within window of ref
  const auto gather = [&](std::size_t ref) {
    std::map<std::string, std::size_t> pick;
    for (std::size_t idx : order) {
      if (taken[idx] || distance(shocks[idx].begin, ref) > window) continue;
      auto [it, fresh] = pick.emplace(shocks[idx].sector, idx);
      if (!fresh && distance(shocks[idx].begin, ref) < distance(shocks[it->second].begin, ref)) it->second = idx;
    }
    return pick;
  };

  std::vector<ShockGroup> groups;
  for (std::size_t seed : order) {
    if (taken[seed]) continue;
    const std::size_t seed_begin = shocks[seed].begin;
    std::map<std::string, std::size_t> earliest;
    for (std::size_t idx : order) {
      if (taken[idx] || shocks[idx].begin > seed_begin + 2 * window) continue;
      earliest.emplace(shocks[idx].sector, idx);
    }
    std::vector<std::size_t> starts;
    for (const auto& [sector, idx] : earliest) starts.push_back(shocks[idx].begin);
    std::sort(starts.begin(), starts.end());
    std::size_t ref = starts[(starts.size() - 1) / 2];
    auto pick = gather(ref);
    const bool has_seed = std::any_of(pick.begin(), pick.end(), [&](const auto& p) { return p.second == seed; });
    if (!has_seed) {
      ref = seed_begin;
      pick = gather(ref);
    }
    ShockGroup g;
    g.reference = ref;
    for (const auto& [sector, idx] : pick) {
      taken[idx] = 1;
      g.members.push_back(shocks[idx]);
    }
    std::sort(g.members.begin(), g.members.end(), [](const Shock& a, const Shock& b) {
      return a.begin != b.begin ? a.begin < b.begin : a.sector < b.sector;
    });
    for (const auto& s : sectors) {
      if (!pick.contains(s)) g.missing.push_back(s);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<double> average_ranks(std::span<const double> values, bool descending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? values[a] > values[b] : values[a] < values[b];
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("spearman inputs differ in length");
  if (a.size() < 2) return std::nullopt;
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

RankTable rank_table(const ShockGroup& group) {
  const auto& m = group.members;
  std::vector<double> start, duration, strength;
  std::vector<std::size_t> with_strength;
  for (std::size_t i = 0; i < m.size(); ++i) {
    start.push_back(static_cast<double>(m[i].begin));
    duration.push_back(static_cast<double>(m[i].duration));
    if (m[i].delta) {
      with_strength.push_back(i);
      strength.push_back(*m[i].delta);
    }
  }
  const auto start_rank = average_ranks(start);
  const auto duration_rank = average_ranks(duration, true);
  const auto strength_rank = average_ranks(strength, true);

  RankTable table;
  for (std::size_t i = 0; i < m.size(); ++i) {
    table.rows.push_back({m[i].sector, m[i].start, start_rank[i], duration_rank[i], std::nullopt});
  }
  for (std::size_t k = 0; k < with_strength.size(); ++k) table.rows[with_strength[k]].strength_rank = strength_rank[k];

  if (m.size() >= 3) table.rho_duration_start = spearman(duration, start);
  if (with_strength.size() >= 3) {
    std::vector<double> s_start;
    for (auto i : with_strength) s_start.push_back(start[i]);
    table.rho_strength_start = spearman(strength, s_start);
  }
  return table;
}

void validate_rate_events(std::span<const RateEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i) {
    if (!(events[i - 1].date < events[i].date)) {
      throw DataError(fmt::format("rate events not sorted at {}", format_date(events[i].date)));
    }
    if (std::abs(events[i - 1].new_rate + events[i].change - events[i].new_rate) > 1e-9) {
      throw DataError(fmt::format("rate event {}: {} + {} != {}", format_date(events[i].date), events[i - 1].new_rate,
                                  events[i].change, events[i].new_rate));
    }
  }
}

std::vector<RateEvent> read_rate_events(std::istream& in) {
  const auto table = csv::Table::read(in);
  const auto c_date = table.column("date");
  const auto c_change = table.column("change");
  const auto c_rate = table.column("new_rate");
  std::vector<RateEvent> events;
  for (const auto& f : table.rows()) {
    events.push_back({parse_date(f[c_date]), csv::parse_number(f[c_change]), csv::parse_number(f[c_rate])});
  }
  validate_rate_events(events);
  return events;
}

const char* response_name(Response r) {
  switch (r) {
    case Response::effective: return "effective";
    case Response::counter_effective: return "counter-effective";
    case Response::ineffective: return "ineffective";
  }
  return "?";
}

EventAnalysis classify_event_responses(std::span<const PhaseTimeline> timelines, std::span<const RateEvent> events,
                                       std::span<const Date> trading_days, const EventWindowOptions& opts) {
  EventAnalysis out;
  if (trading_days.empty()) throw std::invalid_argument("event classification needs trading days");
  const auto day_index = [&](Date d) {
    return static_cast<long>(std::lower_bound(trading_days.begin(), trading_days.end(), d) - trading_days.begin());
  };
  const long window = static_cast<long>(opts.window_days);
  const long anticipation = static_cast<long>(opts.anticipation_days);

  for (const auto& tl : timelines) {
    if (tl.runs.empty()) continue;
    const Date first = date_of(tl.runs.front().start);
    const Date last = date_of(tl.runs.back().end_time);
    for (const auto& ev : events) {
      if (ev.date < first || ev.date > last) {
        out.warnings.push_back(fmt::format("{}: event {} outside the series span, skipped", tl.sector,
                                           format_date(ev.date)));
        continue;
      }
      const long e = day_index(ev.date);
      EventResponse resp;
      resp.sector = tl.sector;
      resp.event = ev;
      long best_gap = window + 1;
      for (std::size_t r = 1; r < tl.runs.size(); ++r) {
        const long offset = day_index(date_of(tl.runs[r].start)) - e;
        if (offset < -window && offset >= -anticipation) resp.anticipatory = true;
        const long gap = std::abs(offset);
        if (gap <= window && gap < best_gap) {
          best_gap = gap;
          resp.boundary = tl.runs[r].start;
          resp.from = tl.runs[r - 1].color;
          resp.to = tl.runs[r].color;
        }
      }
      if (resp.boundary) {
        resp.classification = *resp.to < *resp.from ? Response::effective : Response::counter_effective;
      }
      out.responses.push_back(std::move(resp));
    }
  }
  return out;
}

void write_plotdata_csv(std::ostream& out, std::span<const PhaseTimeline> timelines) {
  std::vector<const PhaseTimeline*> sorted;
  for (const auto& tl : timelines) sorted.push_back(&tl);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->sector < b->sector; });
  out << "sector,start_index,end_index,first_segment,last_segment,start,end,color,phase\n";
  for (const auto* tl : sorted) {
    for (const auto& run : tl->runs) {
      out << tl->sector << ',' << run.begin << ',' << run.end << ',' << run.first_segment << ',' << run.last_segment
          << ',' << format_timestamp(run.start) << ',' << format_timestamp(run.end_time) << ','
          << color_name(run.color) << ',' << phase_name(run.phase()) << '\n';
    }
  }
}

std::vector<PhaseTimeline> read_plotdata_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const auto c_sector = table.column("sector");
  const auto c_begin = table.column("start_index");
  const auto c_end = table.column("end_index");
  const auto c_first = table.column("first_segment");
  const auto c_last = table.column("last_segment");
  const auto c_start = table.column("start");
  const auto c_stop = table.column("end");
  const auto c_color = table.column("color");
  std::vector<PhaseTimeline> out;
  for (const auto& f : table.rows()) {
    if (out.empty() || out.back().sector != f[c_sector]) out.push_back({f[c_sector], {}});
    PhaseRun run;
    run.begin = csv::parse_count(f[c_begin]);
    run.end = csv::parse_count(f[c_end]);
    run.first_segment = csv::parse_count(f[c_first]);
    run.last_segment = csv::parse_count(f[c_last]);
    run.start = parse_timestamp(f[c_start]);
    run.end_time = parse_timestamp(f[c_stop]);
    run.color = parse_color(f[c_color]);
    out.back().runs.push_back(run);
  }
  return out;
}

void write_event_markers_csv(std::ostream& out, std::span<const RateEvent> events) {
  out << "date,change,new_rate\n";
  for (const auto& e : events) {
    out << format_date(e.date) << ',' << csv::format_number(e.change) << ',' << csv::format_number(e.new_rate) << '\n';
  }
}

void write_findings_csv(std::ostream& out, std::span<const std::string> sectors, std::span<const DatedFinding> findings) {
  out << "sector,date,censored\n";
  for (std::size_t i = 0; i < sectors.size(); ++i) {
    out << sectors[i] << ',' << (findings[i].date ? format_date(date_of(*findings[i].date)) : std::string{}) << ','
        << (findings[i].censored ? "true" : "false") << '\n';
  }
}

void write_shocks_csv(std::ostream& out, std::span<const Shock> shocks) {
  out << "sector,class,start,duration,delta,delta_err\n";
  for (const auto& s : shocks) {
    out << s.sector << ',' << shock_class_name(s.cls) << ',' << format_timestamp(s.start) << ',' << s.duration << ','
        << csv::format_optional(s.delta) << ',' << csv::format_optional(s.delta_err) << '\n';
  }
}

void write_rank_csv(std::ostream& out, std::span<const ShockGroup> groups, std::span<const RankTable> tables) {
  out << "group,class,sector,start,start_rank,duration_rank,strength_rank\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& row : tables[g].rows) {
      out << g + 1 << ',' << shock_class_name(groups[g].members.front().cls) << ',' << row.sector << ','
          << format_timestamp(row.start) << ',' << csv::format_number(row.start_rank) << ','
          << csv::format_number(row.duration_rank) << ',' << csv::format_optional(row.strength_rank) << '\n';
    }
  }
}

void write_correlations_csv(std::ostream& out, std::span<const ShockGroup> groups, std::span<const RankTable> tables) {
  out << "group,class,size,rho_duration_start,rho_strength_start,missing\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string missing;
    for (const auto& s : groups[g].missing) missing += (missing.empty() ? "" : " ") + s;
    out << g + 1 << ',' << shock_class_name(groups[g].members.front().cls) << ',' << groups[g].members.size() << ','
        << csv::format_optional(tables[g].rho_duration_start) << ','
        << csv::format_optional(tables[g].rho_strength_start) << ',' << missing << '\n';
  }
}

void write_responses_csv(std::ostream& out, std::span<const EventResponse> responses) {
  out << "sector,date,change,classification,anticipatory,boundary,from,to\n";
  for (const auto& r : responses) {
    out << r.sector << ',' << format_date(r.event.date) << ',' << csv::format_number(r.event.change) << ','
        << response_name(r.classification) << ',' << (r.anticipatory ? "true" : "false") << ','
        << (r.boundary ? format_timestamp(*r.boundary) : std::string{}) << ','
        << (r.from ? color_name(*r.from) : "") << ',' << (r.to ? color_name(*r.to) : "") << '\n';
  }
}

}  // namespace jsseg
