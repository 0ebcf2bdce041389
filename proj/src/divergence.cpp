#include "jsseg/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace jsseg {

namespace {

// Windows shorter than this are scanned on the calling thread.
constexpr std::size_t kParallelScanThreshold = 1 << 14;

struct TwoPass {
  double mean;
  double variance;
};

TwoPass two_pass(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(x.size())};
}

// Shared by every scan so serial and parallel paths produce identical values.
inline double split_score(double whole, double n, double t, double var_l, double var_r) {
  // the sides are added before subtracting so mirror-image splits score identically
  return 0.5 * (whole - (t * std::log(var_l) + (n - t) * std::log(var_r))) + kDivergenceOffset;
}

struct Candidate {
  double divergence = -std::numeric_limits<double>::infinity();
  std::size_t position = 0;
  bool found = false;

  void offer(double d, std::size_t pos) {
    if (!found || d > divergence || (d == divergence && pos < position)) {
      divergence = d;
      position = pos;
      found = true;
    }
  }
  void merge(const Candidate& other) {
    if (other.found) offer(other.divergence, other.position);
  }
};

std::optional<Boundary> to_boundary(const Candidate& c, std::size_t begin, std::size_t end) {
  if (!c.found) return std::nullopt;
  Boundary b;
  b.position = c.position;
  b.divergence = c.divergence;
  b.left_len = c.position - begin;
  b.right_len = end - c.position;
  b.divergence_err = delta_error(b.left_len, b.right_len);
  return b;
}

}  // namespace

SegmentStats make_stats(std::size_t n, double mean, double stdev) {
  if (n < 2) throw std::invalid_argument("segment statistics need at least two points");
  SegmentStats s;
  s.n = n;
  s.mean = mean;
  s.stdev = stdev;
  s.mean_err = stdev / std::sqrt(static_cast<double>(n));
  s.stdev_err = stdev / std::sqrt(2.0 * static_cast<double>(n - 1));
  s.degenerate = !(stdev * stdev > kVarianceFloor);
  return s;
}

SegmentStats segment_stats(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("segment statistics need at least two points");
  const auto tp = two_pass(x);
  return make_stats(x.size(), tp.mean, std::sqrt(tp.variance));
}

double js_divergence_from_variances(std::size_t n, std::size_t t, double var, double var_left,
                                    double var_right) {
  const double dn = static_cast<double>(n);
  return split_score(dn * std::log(var), dn, static_cast<double>(t), var_left, var_right);
}

double js_divergence(std::span<const double> x, std::size_t t) {
  const std::size_t n = x.size();
  if (t < 2 || t + 2 > n) {
    throw std::invalid_argument(fmt::format("split {} outside [2, {}]", t, n < 2 ? 0 : n - 2));
  }
  const double var = two_pass(x).variance;
  const double var_l = two_pass(x.first(t)).variance;
  const double var_r = two_pass(x.subspan(t)).variance;
  if (!(var > kVarianceFloor) || !(var_l > kVarianceFloor) || !(var_r > kVarianceFloor)) {
    throw DegenerateSplit(fmt::format("zero variance at split {}", t));
  }
  return js_divergence_from_variances(n, t, var, var_l, var_r);
}

PrefixSums::PrefixSums(std::span<const double> x) {
  if (!x.empty()) {
    double total = 0.0;
    for (double v : x) total += v;
    shift_ = total / static_cast<double>(x.size());
  }
  sum_.assign(x.size() + 1, 0.0L);
  sum_sq_.assign(x.size() + 1, 0.0L);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const long double d = static_cast<long double>(x[i]) - shift_;
    sum_[i + 1] = sum_[i] + d;
    sum_sq_[i + 1] = sum_sq_[i] + d * d;
  }
}

double PrefixSums::mean(std::size_t begin, std::size_t end) const {
  return static_cast<double>((sum_[end] - sum_[begin]) / static_cast<long double>(end - begin) + shift_);
}

std::optional<double> PrefixSums::variance(std::size_t begin, std::size_t end) const {
  const long double n = static_cast<long double>(end - begin);
  const long double m1 = (sum_[end] - sum_[begin]) / n;
  const long double m2 = (sum_sq_[end] - sum_sq_[begin]) / n;
  const double var = static_cast<double>(m2 - m1 * m1);
  if (!(var > kVarianceFloor) || !(var > kRelativeVarianceFloor * static_cast<double>(m2))) return std::nullopt;
  return var;
}

SegmentStats PrefixSums::stats(std::size_t begin, std::size_t end) const {
  if (end < begin + 2 || end > size()) throw std::invalid_argument("invalid statistics window");
  const auto var = variance(begin, end);
  return make_stats(end - begin, mean(begin, end), var ? std::sqrt(*var) : 0.0);
}

std::optional<double> PrefixSums::divergence(std::size_t begin, std::size_t split, std::size_t end) const {
  const auto var = variance(begin, end);
  const auto var_l = variance(begin, split);
  const auto var_r = variance(split, end);
  if (!var || !var_l || !var_r) return std::nullopt;
  return js_divergence_from_variances(end - begin, split - begin, *var, *var_l, *var_r);
}

std::optional<Boundary> best_split_serial(const PrefixSums& sums, std::size_t begin, std::size_t end,
                                          std::size_t margin) {
  margin = std::max<std::size_t>(margin, 2);
  if (end > sums.size() || end < begin + 2 * margin) return std::nullopt;
  const auto var = sums.variance(begin, end);
  if (!var) return std::nullopt;
  const double n = static_cast<double>(end - begin);
  const double whole = n * std::log(*var);
  Candidate best;
  for (std::size_t pos = begin + margin; pos + margin <= end; ++pos) {
    const auto var_l = sums.variance(begin, pos);
    const auto var_r = sums.variance(pos, end);
    if (!var_l || !var_r) continue;
    const double t = static_cast<double>(pos - begin);
    best.offer(split_score(whole, n, t, *var_l, *var_r), pos);
  }
  return to_boundary(best, begin, end);
}

std::optional<Boundary> best_split(const PrefixSums& sums, std::size_t begin, std::size_t end,
                                   std::size_t margin) {
  margin = std::max<std::size_t>(margin, 2);
  if (end > sums.size() || end < begin + 2 * margin) return std::nullopt;
  const std::size_t len = end - begin;
  if (len < kParallelScanThreshold) return best_split_serial(sums, begin, end, margin);

  const auto var = sums.variance(begin, end);
  if (!var) return std::nullopt;
  const double n = static_cast<double>(len);
  const double whole = n * std::log(*var);
  const auto first = static_cast<std::ptrdiff_t>(begin + margin);
  const auto last = static_cast<std::ptrdiff_t>(end - margin);
  Candidate best;
#pragma omp parallel
  {
    Candidate local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t p = first; p <= last; ++p) {
      const auto pos = static_cast<std::size_t>(p);
      const auto var_l = sums.variance(begin, pos);
      const auto var_r = sums.variance(pos, end);
      if (!var_l || !var_r) continue;
      const double t = static_cast<double>(pos - begin);
      local.offer(split_score(whole, n, t, *var_l, *var_r), pos);
    }
#pragma omp critical(jsseg_best_split)
    best.merge(local);
  }
  return to_boundary(best, begin, end);
}

std::optional<Boundary> best_split(std::span<const double> x, std::size_t margin) {
  const PrefixSums sums(x);
  return best_split(sums, 0, x.size(), margin);
}

double delta_error(std::size_t n_left, std::size_t n_right) {
  if (n_left < 2 || n_right < 2) throw std::invalid_argument("delta_error needs at least two points per side");
  const auto term = [](std::size_t k) {
    const double dk = static_cast<double>(k);
    return dk / std::sqrt(2.0 * (dk - 1.0));
  };
  return term(n_left) + term(n_right) - term(n_left + n_right);
}

double delta_error_max(std::size_t n) {
  if (n < 4) throw std::invalid_argument("delta_error_max needs n >= 4");
  return std::sqrt(static_cast<double>(n)) * (1.0 - 1.0 / std::sqrt(2.0));
}

}  // namespace jsseg
