#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsseg/divergence.hpp"
#include "jsseg/time.hpp"

namespace jsseg {

struct SegmentationConfig {
  double cutoff = 10.0;               // minimum divergence of an accepted boundary
  std::size_t min_segment_len = 14;   // one trading day of half-hours
  std::size_t long_segment_len = 1000;
  double refine_floor = 2.0;          // lowest local cutoff tried during refinement
  std::size_t max_opt_iters = 100;    // sweep cap for boundary optimization

  void validate() const;
};

enum class BoundaryFlag { automatic, refined };

const char* to_string(BoundaryFlag flag);

struct Segment {
  std::size_t begin = 0;  // half-open [begin, end) over the return series
  std::size_t end = 0;
  SegmentStats stats;

  std::size_t length() const { return end - begin; }
};

struct SegmentationResult {
  std::vector<Segment> segments;
  std::vector<Boundary> boundaries;  // boundaries[i] separates segments[i] and segments[i + 1]
  std::vector<BoundaryFlag> flags;
  SegmentationConfig config;
  bool converged = true;
  std::vector<std::string> warnings;
};

struct OptimizeResult {
  std::vector<Boundary> boundaries;
  bool converged = true;
  std::size_t sweeps = 0;
};

/// Moves every boundary to the divergence argmax of the window between its
/// neighbours, sweeping until nothing moves or max_iters sweeps have run.
/// sweep_order, when given, is a permutation of boundary indices.
OptimizeResult optimize_boundaries(const PrefixSums& sums, std::span<const std::size_t> positions,
                                   std::size_t min_segment_len, std::size_t max_iters,
                                   std::span<const std::size_t> sweep_order = {});
OptimizeResult optimize_boundaries(std::span<const double> x, std::span<const std::size_t> positions,
                                   std::size_t min_segment_len = 14, std::size_t max_iters = 100,
                                   std::span<const std::size_t> sweep_order = {});

/// Greedy recursive segmentation: repeatedly accepts the strongest split
/// clearing the cutoff, re-optimizing all boundaries after each acceptance.
SegmentationResult recursive_segment(std::span<const double> x, const SegmentationConfig& cfg = {});

/// Lowers the cutoff locally inside segments longer than long_segment_len
/// and keeps new boundaries whose optimized divergence exceeds the cutoff.
SegmentationResult refine_long_segments(std::span<const double> x, const SegmentationResult& result,
                                        const SegmentationConfig& cfg);

/// recursive_segment followed by refine_long_segments.
SegmentationResult segment_series(std::span<const double> x, const SegmentationConfig& cfg = {});

/// One row of the per-segment listing. start/end are 1-based and inclusive.
struct SegmentRow {
  std::size_t m = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t duration = 0;
  std::string start_date;
  double mean = 0.0;
  double mean_err = 0.0;
  double stdev = 0.0;
  double stdev_err = 0.0;
  std::optional<double> delta;  // divergence of the boundary with the previous segment
  std::optional<double> delta_err;
  std::string flag;
};

inline constexpr const char* kSegmentColumns =
    "m,start,end,duration,start_date,mean,mean_err,stdev,stdev_err,delta,delta_err,flag";

/// base_grid, when non-empty, supplies the start date of each segment.
std::vector<SegmentRow> emit_segment_table(const SegmentationResult& result,
                                           std::span<const Timestamp> base_grid = {});

void write_segment_csv(std::ostream& out, std::span<const SegmentRow> rows);
void write_segment_json(std::ostream& out, std::span<const SegmentRow> rows, const SegmentationConfig& cfg,
                        bool converged);
std::vector<SegmentRow> read_segment_csv(std::istream& in);

/// Stats carried by a listing row (n = duration).
SegmentStats row_stats(const SegmentRow& row);

}  // namespace jsseg
