#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace jsseg {

/// Constant term of the simplified two-segment divergence.
inline constexpr double kDivergenceOffset = 0.5;
/// Variances at or below this are degenerate.
inline constexpr double kVarianceFloor = 1e-30;
/// Prefix-sum variances smaller than this fraction of the raw second moment
/// are indistinguishable from cancellation noise and treated as degenerate.
inline constexpr double kRelativeVarianceFloor = 1e-10;

/// Gaussian fit of a window: MLE mean and standard deviation plus their
/// finite-sample standard errors.
struct SegmentStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stdev = 0.0;
  double mean_err = 0.0;   // stdev / sqrt(n)
  double stdev_err = 0.0;  // stdev / sqrt(2 (n - 1))
  bool degenerate = false;

  double variance() const { return stdev * stdev; }
};

/// Builds stats from (n, mean, stdev), filling the error fields.
SegmentStats make_stats(std::size_t n, double mean, double stdev);

/// Two-pass statistics of a window of at least two points.
SegmentStats segment_stats(std::span<const double> x);

class DegenerateSplit : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Divergence of splitting x into x[0, t) and x[t, n), evaluated directly.
/// Requires 2 <= t <= n - 2. Throws DegenerateSplit on a zero variance.
double js_divergence(std::span<const double> x, std::size_t t);

/// Divergence from the three MLE variances of a split with t points on the left.
double js_divergence_from_variances(std::size_t n, std::size_t t, double var, double var_left,
                                    double var_right);

/// Running sums of a (shifted) series, giving O(1) window statistics.
class PrefixSums {
 public:
  PrefixSums() = default;
  explicit PrefixSums(std::span<const double> x);

  std::size_t size() const { return sum_.empty() ? 0 : sum_.size() - 1; }

  /// MLE variance of x[begin, end); nullopt when degenerate.
  std::optional<double> variance(std::size_t begin, std::size_t end) const;
  double mean(std::size_t begin, std::size_t end) const;
  SegmentStats stats(std::size_t begin, std::size_t end) const;

  /// Divergence of the split of [begin, end) at absolute index split.
  std::optional<double> divergence(std::size_t begin, std::size_t split, std::size_t end) const;

 private:
  double shift_ = 0.0;
  // extended precision keeps quiet windows next to wild ones from cancelling
  std::vector<long double> sum_;
  std::vector<long double> sum_sq_;
};

/// A scored split point. position is the absolute index of the first point
/// of the right-hand segment.
struct Boundary {
  std::size_t position = 0;
  double divergence = 0.0;
  double divergence_err = 0.0;
  std::size_t left_len = 0;
  std::size_t right_len = 0;
};

/// Argmax of the divergence over splits of [begin, end) leaving at least
/// margin points on each side. Ties resolve to the smallest position.
/// Returns nullopt if the window is too short or every split is degenerate.
/// Large windows are scanned in parallel; the result equals best_split_serial.
std::optional<Boundary> best_split(const PrefixSums& sums, std::size_t begin, std::size_t end,
                                   std::size_t margin = 2);
std::optional<Boundary> best_split_serial(const PrefixSums& sums, std::size_t begin, std::size_t end,
                                          std::size_t margin = 2);
std::optional<Boundary> best_split(std::span<const double> x, std::size_t margin = 2);

/// Standard error of the divergence of a split into n_left and n_right points.
double delta_error(std::size_t n_left, std::size_t n_right);
/// Large-n maximum of delta_error over splits of n points: sqrt(n) (1 - 1/sqrt(2)).
double delta_error_max(std::size_t n);

}  // namespace jsseg
