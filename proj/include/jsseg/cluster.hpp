#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jsseg/divergence.hpp"

namespace jsseg {

/// Divergence between two fitted segments, as if their raw windows were
/// concatenated and split at the junction. +infinity when degenerate.
double segment_distance(const SegmentStats& a, const SegmentStats& b);

/// Dense symmetric matrix of pairwise segment distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

DistanceMatrix distance_matrix_serial(std::span<const SegmentStats> segments);
/// Rows are filled in parallel; identical to distance_matrix_serial.
DistanceMatrix distance_matrix(std::span<const SegmentStats> segments);

/// Merge of clusters a < b at the given height. Leaves are 0..leaves-1; the
/// cluster created by merge i gets id leaves + i.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;

  double height() const { return merges.empty() ? 0.0 : merges.back().height; }
};

/// Complete-link agglomeration. Ties go to the smallest (a, b) id pair.
Dendrogram complete_link(const DistanceMatrix& d);
Dendrogram complete_link(std::span<const SegmentStats> segments);

/// Cluster label of every leaf after applying the first `merges` merges.
/// Labels are numbered by first appearance in leaf order.
std::vector<std::size_t> cut_after(const Dendrogram& tree, std::size_t merges);

enum class ExtractionPolicy { uniform, per_branch };

ExtractionPolicy parse_policy(const std::string& name);
const char* to_string(ExtractionPolicy policy);

/// Threshold interval [lower, upper) that yields exactly k clusters.
struct KRobustness {
  std::size_t k = 0;
  double lower = 0.0;
  double upper = 0.0;
  double score = 0.0;  // (upper - lower) / tree height
  std::vector<std::size_t> branch_k;  // per-branch split of k (per-branch policy only)
};

enum class Color { black, blue, green, yellow, orange, red };

inline constexpr std::size_t kLadderSize = 6;

const char* color_name(Color c);
Color parse_color(const std::string& name);
/// "extremely low" ... "extremely high".
const char* volatility_class(Color c);

enum class Phase { growth, correction, crisis, crash };

const char* phase_name(Phase p);
Phase phase_of(Color c);

struct ClusterAssignment {
  std::vector<std::size_t> cluster_of;  // per segment
  std::size_t k = 0;
  std::vector<double> mean_volatility;  // per cluster, filled by assign_phases
  std::vector<Color> color;             // per cluster
  std::vector<std::string> warnings;

  Color color_of_segment(std::size_t i) const { return color[cluster_of[i]]; }
};

struct Extraction {
  ClusterAssignment assignment;
  std::vector<KRobustness> report;
  std::size_t chosen_k = 0;
  ExtractionPolicy policy = ExtractionPolicy::uniform;
};

/// Evaluates every k in [k_min, k_max] and picks the most robust one
/// (ties toward smaller k). per_branch cuts the two top-level branches
/// independently.
Extraction extract_clusters(const Dendrogram& tree, std::size_t k_min, std::size_t k_max,
                            ExtractionPolicy policy = ExtractionPolicy::uniform);

enum class VolatilityWeighting { by_length, unweighted };

/// Relabels clusters by ascending mean volatility and colors them with the
/// top of the ladder (five clusters: blue..red, six: black..red).
ClusterAssignment assign_phases(ClusterAssignment assignment, std::span<const SegmentStats> segments,
                                std::span<const std::size_t> segment_starts = {},
                                VolatilityWeighting weighting = VolatilityWeighting::by_length);

void write_dendrogram_json(std::ostream& out, const Dendrogram& tree, const Extraction& extraction);
void write_merges_csv(std::ostream& out, const Dendrogram& tree);
void write_assignment_csv(std::ostream& out, const ClusterAssignment& assignment);

struct AssignmentRow {
  std::size_t segment = 0;  // 1-based, matches the segment table's m
  std::size_t cluster = 0;
  Color color = Color::blue;
};
std::vector<AssignmentRow> read_assignment_csv(std::istream& in);

}  // namespace jsseg
