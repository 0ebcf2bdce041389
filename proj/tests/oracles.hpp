#pragma once

// Independent reference implementations. Nothing here calls into the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

struct Fit {
  long double mean = 0;
  long double var = 0;
};

inline Fit mle_fit(std::span<const double> x) {
  long double s = 0;
  for (double v : x) s += v;
  const long double mean = s / x.size();
  long double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, ss / x.size()};
}

/// ln of the product of Gaussian densities of x under N(mean, var).
inline long double log_likelihood(std::span<const double> x, const Fit& f) {
  long double ll = 0;
  for (double v : x) {
    const long double z = v - f.mean;
    ll += -0.5L * std::log(2.0L * std::numbers::pi_v<long double> * f.var) - z * z / (2.0L * f.var);
  }
  return ll;
}

/// ln(L2/L1): two-segment fit against the one-segment fit, split at t.
inline double log_likelihood_ratio(std::span<const double> x, std::size_t t) {
  const auto left = x.first(t);
  const auto right = x.subspan(t);
  const long double l2 = log_likelihood(left, mle_fit(left)) + log_likelihood(right, mle_fit(right));
  const long double l1 = log_likelihood(x, mle_fit(x));
  return static_cast<double>(l2 - l1);
}

/// Standard error of a split's divergence, written out term by term.
inline double delta_error(double nl, double nr) {
  const double n = nl + nr;
  return nl / std::sqrt(2.0 * (nl - 1.0)) + nr / std::sqrt(2.0 * (nr - 1.0)) - n / std::sqrt(2.0 * (n - 1.0));
}

struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0;
  std::size_t size = 0;
};

/// Complete link by recomputing every cluster pair's maximum member distance
/// each round. Ties go to the lexicographically smallest (a, b) id pair; the
/// cluster made by round i gets id leaves + i.
template <class Dist>
std::vector<Merge> complete_link(std::size_t leaves, Dist&& d) {
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> live;
  for (std::size_t i = 0; i < leaves; ++i) live.push_back({i, {i}});
  std::vector<Merge> out;
  for (std::size_t round = 0; round + 1 < leaves; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_ids{SIZE_MAX, SIZE_MAX};
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = 0; j < live.size(); ++j) {
        if (i == j) continue;
        double h = -std::numeric_limits<double>::infinity();
        for (auto p : live[i].second) {
          for (auto q : live[j].second) h = std::max(h, d(p, q));
        }
        const std::pair<std::size_t, std::size_t> ids = std::minmax(live[i].first, live[j].first);
        if (h < best || (h == best && ids < best_ids)) {
          best = h;
          best_ids = ids;
          bi = i;
          bj = j;
        }
      }
    }
    auto members = live[bi].second;
    members.insert(members.end(), live[bj].second.begin(), live[bj].second.end());
    out.push_back({best_ids.first, best_ids.second, best, members.size()});
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::max(bi, bj)));
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(std::min(bi, bj)));
    live.push_back({leaves + round, std::move(members)});
  }
  return out;
}

/// Rank by definition: 1 + (number smaller) + half the number of other equal values.
inline std::vector<double> ranks(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double below = 0, equal = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) below += 1;
      if (j != i && v[j] == v[i]) equal += 1;
    }
    r[i] = 1 + below + equal / 2;
  }
  return r;
}

inline double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const long double n = a.size();
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

}  // namespace oracle
