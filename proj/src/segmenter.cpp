#include "jsseg/segmenter.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "jsseg/csv.hpp"
#include "jsseg/error.hpp"

namespace jsseg {

void SegmentationConfig::validate() const {
  if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
  if (min_segment_len < 4) throw std::invalid_argument("min_segment_len must be at least 4");
  if (!(refine_floor > 0.0) || refine_floor > cutoff) {
    throw std::invalid_argument("refine_floor must lie in (0, cutoff]");
  }
  if (long_segment_len < 2 * min_segment_len) {
    throw std::invalid_argument("long_segment_len must be at least twice min_segment_len");
  }
  if (max_opt_iters < 1) throw std::invalid_argument("max_opt_iters must be positive");
}

const char* to_string(BoundaryFlag flag) {
  return flag == BoundaryFlag::automatic ? "automatic" : "refined";
}

namespace {

/// Boundary list over the domain [lo, hi) with per-boundary rescan marks.
/// Only boundaries whose window changed since their last scan are rescanned;
/// an unchanged window has the same argmax, so this matches full sweeps.
class BoundarySet {
 public:
  BoundarySet(const PrefixSums& sums, std::size_t lo, std::size_t hi, std::size_t min_len, std::size_t max_iters)
      : sums_(&sums), lo_(lo), hi_(hi), min_len_(min_len), max_iters_(max_iters) {}

  const std::vector<std::size_t>& positions() const { return pos_; }
  const std::vector<Boundary>& info() const { return info_; }
  const std::vector<BoundaryFlag>& flags() const { return flags_; }
  bool converged() const { return converged_; }
  std::size_t sweeps() const { return sweeps_; }
  std::size_t lo() const { return lo_; }
  std::size_t hi() const { return hi_; }

  std::size_t left_edge(std::size_t k) const { return k == 0 ? lo_ : pos_[k - 1]; }
  std::size_t right_edge(std::size_t k) const { return k + 1 == pos_.size() ? hi_ : pos_[k + 1]; }

  void insert(const Boundary& b, BoundaryFlag flag) {
    const auto it = std::lower_bound(pos_.begin(), pos_.end(), b.position);
    const auto k = static_cast<std::size_t>(it - pos_.begin());
    pos_.insert(it, b.position);
    info_.insert(info_.begin() + static_cast<std::ptrdiff_t>(k), b);
    flags_.insert(flags_.begin() + static_cast<std::ptrdiff_t>(k), flag);
    dirty_.insert(dirty_.begin() + static_cast<std::ptrdiff_t>(k), 1);
    mark_neighbours(k);
  }

  void erase(std::size_t k) {
    pos_.erase(pos_.begin() + static_cast<std::ptrdiff_t>(k));
    info_.erase(info_.begin() + static_cast<std::ptrdiff_t>(k));
    flags_.erase(flags_.begin() + static_cast<std::ptrdiff_t>(k));
    dirty_.erase(dirty_.begin() + static_cast<std::ptrdiff_t>(k));
    if (k > 0) dirty_[k - 1] = 1;
    if (k < dirty_.size()) dirty_[k] = 1;
  }

  void mark_all() { std::fill(dirty_.begin(), dirty_.end(), 1); }

  void optimize(std::span<const std::size_t> order = {}) {
    std::vector<std::size_t> seq(order.begin(), order.end());
    if (seq.empty()) {
      seq.resize(pos_.size());
      std::iota(seq.begin(), seq.end(), 0);
    }
    converged_ = false;
    sweeps_ = 0;
    while (sweeps_ < max_iters_) {
      ++sweeps_;
      bool moved = false;
      for (std::size_t k : seq) {
        if (!dirty_[k]) continue;
        dirty_[k] = 0;
        const std::size_t begin = left_edge(k);
        const std::size_t end = right_edge(k);
        const auto best = best_split(*sums_, begin, end, min_len_);
        if (!best) {
          info_[k] = score_in_place(begin, pos_[k], end);
          continue;
        }
        info_[k] = *best;
        if (best->position != pos_[k]) {
          pos_[k] = best->position;
          mark_neighbours(k);
          dirty_[k] = 0;
          moved = true;
        }
      }
      if (!moved) {
        converged_ = true;
        break;
      }
    }
  }

  /// Removes the weakest boundary below the cutoff and re-optimizes until
  /// every boundary clears it.
  void prune(double cutoff) {
    while (!pos_.empty()) {
      std::size_t weakest = 0;
      for (std::size_t k = 1; k < info_.size(); ++k) {
        if (info_[k].divergence < info_[weakest].divergence) weakest = k;
      }
      if (info_[weakest].divergence >= cutoff) break;
      erase(weakest);
      optimize();
    }
  }

  /// Greedy recursive growth at the given cutoff. Returns false if a
  /// configuration repeated and growth stopped early.
  bool grow(double cutoff, BoundaryFlag flag) {
    using Window = std::pair<std::size_t, std::size_t>;
    std::map<Window, std::optional<Boundary>> cache;
    std::set<Window> rejected;
    std::set<std::vector<std::size_t>> seen{pos_};
    while (true) {
      std::optional<Boundary> best;
      Window best_window{};
      for (std::size_t k = 0; k <= pos_.size(); ++k) {
        const Window w{k == 0 ? lo_ : pos_[k - 1], k == pos_.size() ? hi_ : pos_[k]};
        if (w.second - w.first < 2 * min_len_ || rejected.contains(w)) continue;
        auto it = cache.find(w);
        if (it == cache.end()) it = cache.emplace(w, best_split(*sums_, w.first, w.second, min_len_)).first;
        const auto& cand = it->second;
        if (!cand || cand->divergence < cutoff) continue;
        if (!best || cand->divergence > best->divergence) {
          best = cand;
          best_window = w;
        }
      }
      if (!best) return true;
      const auto before = pos_;
      insert(*best, flag);
      optimize();
      prune(cutoff);
      if (pos_ == before) {
        rejected.insert(best_window);
        continue;
      }
      if (!seen.insert(pos_).second) return false;
    }
  }

 private:
  Boundary score_in_place(std::size_t begin, std::size_t position, std::size_t end) const {
    Boundary b;
    b.position = position;
    b.left_len = position - begin;
    b.right_len = end - position;
    b.divergence = 0.0;
    if (b.left_len >= 2 && b.right_len >= 2) {
      b.divergence = sums_->divergence(begin, position, end).value_or(0.0);
      b.divergence_err = delta_error(b.left_len, b.right_len);
    }
    return b;
  }

  void mark_neighbours(std::size_t k) {
    if (k > 0) dirty_[k - 1] = 1;
    if (k + 1 < dirty_.size()) dirty_[k + 1] = 1;
  }

  const PrefixSums* sums_;
  std::size_t lo_;
  std::size_t hi_;
  std::size_t min_len_;
  std::size_t max_iters_;
  std::vector<std::size_t> pos_;
  std::vector<Boundary> info_;
  std::vector<BoundaryFlag> flags_;
  std::vector<char> dirty_;
  bool converged_ = true;
  std::size_t sweeps_ = 0;
};

SegmentationResult build_result(std::span<const double> x, const BoundarySet& set, const SegmentationConfig& cfg) {
  SegmentationResult r;
  r.config = cfg;
  r.converged = set.converged();
  r.boundaries = set.info();
  r.flags = set.flags();
  std::size_t begin = 0;
  for (std::size_t k = 0; k <= set.positions().size(); ++k) {
    const std::size_t end = k == set.positions().size() ? x.size() : set.positions()[k];
    r.segments.push_back({begin, end, segment_stats(x.subspan(begin, end - begin))});
    begin = end;
  }
  if (!r.converged) {
    r.warnings.push_back(fmt::format("boundary optimization hit {} sweeps without converging", cfg.max_opt_iters));
  }
  return r;
}

std::size_t strong_refined(const BoundarySet& set, double cutoff) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < set.flags().size(); ++k) {
    if (set.flags()[k] == BoundaryFlag::refined && set.info()[k].divergence > cutoff) ++count;
  }
  return count;
}

void load(BoundarySet& set, const SegmentationResult& result) {
  for (std::size_t k = 0; k < result.boundaries.size(); ++k) set.insert(result.boundaries[k], result.flags[k]);
}

}  // namespace

OptimizeResult optimize_boundaries(const PrefixSums& sums, std::span<const std::size_t> positions,
                                   std::size_t min_segment_len, std::size_t max_iters,
                                   std::span<const std::size_t> sweep_order) {
  const std::size_t n = sums.size();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (positions[k] == 0 || positions[k] >= n || (k > 0 && positions[k] <= positions[k - 1])) {
      throw std::invalid_argument("boundaries must be strictly increasing and interior");
    }
  }
  if (!sweep_order.empty()) {
    std::vector<std::size_t> check(sweep_order.begin(), sweep_order.end());
    std::sort(check.begin(), check.end());
    for (std::size_t k = 0; k < check.size(); ++k) {
      if (check[k] != k || check.size() != positions.size()) {
        throw std::invalid_argument("sweep order must be a permutation of boundary indices");
      }
    }
  }
  BoundarySet set(sums, 0, n, std::max<std::size_t>(min_segment_len, 2), max_iters);
  for (std::size_t p : positions) set.insert(Boundary{p, 0.0, 0.0, 0, 0}, BoundaryFlag::automatic);
  set.mark_all();
  set.optimize(sweep_order);
  return {set.info(), set.converged(), set.sweeps()};
}

OptimizeResult optimize_boundaries(std::span<const double> x, std::span<const std::size_t> positions,
                                   std::size_t min_segment_len, std::size_t max_iters,
                                   std::span<const std::size_t> sweep_order) {
  const PrefixSums sums(x);
  return optimize_boundaries(sums, positions, min_segment_len, max_iters, sweep_order);
}

SegmentationResult recursive_segment(std::span<const double> x, const SegmentationConfig& cfg) {
  cfg.validate();
  if (x.size() < 2) throw std::invalid_argument("segmentation needs at least two returns");
  const PrefixSums sums(x);
  BoundarySet set(sums, 0, x.size(), cfg.min_segment_len, cfg.max_opt_iters);
  const bool clean = set.grow(cfg.cutoff, BoundaryFlag::automatic);
  auto result = build_result(x, set, cfg);
  if (!clean) result.warnings.push_back("segmentation stopped on a repeated boundary configuration");
  return result;
}

SegmentationResult refine_long_segments(std::span<const double> x, const SegmentationResult& result,
                                        const SegmentationConfig& cfg) {
  cfg.validate();
  const PrefixSums sums(x);
  BoundarySet set(sums, 0, x.size(), cfg.min_segment_len, cfg.max_opt_iters);
  load(set, result);
  std::set<std::pair<std::size_t, std::size_t>> tried;
  std::vector<std::string> warnings = result.warnings;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k <= set.positions().size() && !changed; ++k) {
      const std::size_t begin = k == 0 ? 0 : set.positions()[k - 1];
      const std::size_t end = k == set.positions().size() ? x.size() : set.positions()[k];
      if (end - begin <= cfg.long_segment_len || !tried.insert({begin, end}).second) continue;

      for (double local = std::max(cfg.cutoff * 0.5, cfg.refine_floor);; local = std::max(local * 0.5, cfg.refine_floor)) {
        BoundarySet inner(sums, begin, end, cfg.min_segment_len, cfg.max_opt_iters);
        inner.grow(local, BoundaryFlag::refined);
        if (!inner.positions().empty()) {
          BoundarySet trial = set;
          for (const auto& b : inner.info()) trial.insert(b, BoundaryFlag::refined);
          trial.optimize();
          trial.prune(cfg.cutoff);
          if (strong_refined(trial, cfg.cutoff) > strong_refined(set, cfg.cutoff)) {
            set = std::move(trial);
            changed = true;
            break;
          }
        }
        if (local <= cfg.refine_floor) break;
      }
    }
  }
  auto out = build_result(x, set, cfg);
  out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

SegmentationResult segment_series(std::span<const double> x, const SegmentationConfig& cfg) {
  return refine_long_segments(x, recursive_segment(x, cfg), cfg);
}

std::vector<SegmentRow> emit_segment_table(const SegmentationResult& result, std::span<const Timestamp> base_grid) {
  std::vector<SegmentRow> rows;
  rows.reserve(result.segments.size());
  for (std::size_t m = 0; m < result.segments.size(); ++m) {
    const auto& seg = result.segments[m];
    SegmentRow row;
    row.m = m + 1;
    row.start = seg.begin + 1;
    row.end = seg.end;
    row.duration = seg.length();
    if (seg.begin < base_grid.size()) row.start_date = format_date(date_of(base_grid[seg.begin]));
    row.mean = seg.stats.mean;
    row.mean_err = seg.stats.mean_err;
    row.stdev = seg.stats.stdev;
    row.stdev_err = seg.stats.stdev_err;
    if (m > 0) {
      row.delta = result.boundaries[m - 1].divergence;
      row.delta_err = result.boundaries[m - 1].divergence_err;
      row.flag = to_string(result.flags[m - 1]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_segment_csv(std::ostream& out, std::span<const SegmentRow> rows) {
  out << kSegmentColumns << '\n';
  for (const auto& r : rows) {
    out << r.m << ',' << r.start << ',' << r.end << ',' << r.duration << ',' << r.start_date << ','
        << csv::format_number(r.mean) << ',' << csv::format_number(r.mean_err) << ','
        << csv::format_number(r.stdev) << ',' << csv::format_number(r.stdev_err) << ','
        << csv::format_optional(r.delta) << ',' << csv::format_optional(r.delta_err) << ',' << r.flag << '\n';
  }
}

void write_segment_json(std::ostream& out, std::span<const SegmentRow> rows, const SegmentationConfig& cfg,
                        bool converged) {
  nlohmann::ordered_json j;
  j["config"] = {{"cutoff", cfg.cutoff},
                 {"min_segment_len", cfg.min_segment_len},
                 {"long_segment_len", cfg.long_segment_len},
                 {"refine_floor", cfg.refine_floor},
                 {"max_opt_iters", cfg.max_opt_iters}};
  j["converged"] = converged;
  auto& segs = j["segments"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json s;
    s["m"] = r.m;
    s["start"] = r.start;
    s["end"] = r.end;
    s["duration"] = r.duration;
    s["start_date"] = r.start_date;
    s["mean"] = r.mean;
    s["mean_err"] = r.mean_err;
    s["stdev"] = r.stdev;
    s["stdev_err"] = r.stdev_err;
    s["delta"] = r.delta ? nlohmann::ordered_json(*r.delta) : nlohmann::ordered_json(nullptr);
    s["delta_err"] = r.delta_err ? nlohmann::ordered_json(*r.delta_err) : nlohmann::ordered_json(nullptr);
    s["flag"] = r.flag;
    segs.push_back(std::move(s));
  }
  out << j.dump(1) << '\n';
}

std::vector<SegmentRow> read_segment_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const auto col = [&](const char* name) { return table.column(name); };
  const auto c_m = col("m"), c_start = col("start"), c_end = col("end"), c_dur = col("duration"),
             c_date = col("start_date"), c_mean = col("mean"), c_merr = col("mean_err"), c_sd = col("stdev"),
             c_sderr = col("stdev_err"), c_delta = col("delta"), c_derr = col("delta_err"), c_flag = col("flag");
  std::vector<SegmentRow> rows;
  for (const auto& f : table.rows()) {
    SegmentRow r;
    r.m = csv::parse_count(f[c_m]);
    r.start = csv::parse_count(f[c_start]);
    r.end = csv::parse_count(f[c_end]);
    r.duration = csv::parse_count(f[c_dur]);
    r.start_date = f[c_date];
    r.mean = csv::parse_number(f[c_mean]);
    r.mean_err = csv::parse_number(f[c_merr]);
    r.stdev = csv::parse_number(f[c_sd]);
    r.stdev_err = csv::parse_number(f[c_sderr]);
    r.delta = csv::parse_optional(f[c_delta]);
    r.delta_err = csv::parse_optional(f[c_derr]);
    r.flag = f[c_flag];
    if (r.duration < 2 || r.end + 1 != r.start + r.duration) {
      throw DataError(fmt::format("segment row {} has inconsistent extent", r.m));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

SegmentStats row_stats(const SegmentRow& row) { return make_stats(row.duration, row.mean, row.stdev); }

}  // namespace jsseg
