#include "jsseg/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "jsseg/csv.hpp"
#include "jsseg/error.hpp"

namespace jsseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Color kLadder[kLadderSize] = {Color::black, Color::blue, Color::green,
                                        Color::yellow, Color::orange, Color::red};

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

/// Leaf labels after applying the listed merges (indices into tree.merges).
std::vector<std::size_t> apply_merges(const Dendrogram& tree, std::span<const std::size_t> merge_ids) {
  const std::size_t n = tree.leaves;
  // node id -> representative leaf
  std::vector<std::size_t> rep(n + tree.merges.size());
  std::iota(rep.begin(), rep.begin() + static_cast<std::ptrdiff_t>(n), 0);
  for (std::size_t i = 0; i < tree.merges.size(); ++i) rep[n + i] = rep[tree.merges[i].a];
  UnionFind uf(n);
  for (std::size_t i : merge_ids) {
    const auto ra = uf.find(rep[tree.merges[i].a]);
    const auto rb = uf.find(rep[tree.merges[i].b]);
    uf.parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<std::size_t> label(n);
  std::vector<std::size_t> seen(n, std::numeric_limits<std::size_t>::max());
  std::size_t next = 0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const auto root = uf.find(leaf);
    if (seen[root] == std::numeric_limits<std::size_t>::max()) seen[root] = next++;
    label[leaf] = seen[root];
  }
  return label;
}

void collect_subtree(const Dendrogram& tree, std::size_t node, std::vector<std::size_t>& merges,
                     std::size_t& leaves) {
  if (node < tree.leaves) {
    ++leaves;
    return;
  }
  const auto idx = node - tree.leaves;
  merges.push_back(idx);
  collect_subtree(tree, tree.merges[idx].a, merges, leaves);
  collect_subtree(tree, tree.merges[idx].b, merges, leaves);
}

struct Branch {
  std::vector<std::size_t> merges;  // ascending
  std::size_t leaves = 0;
  double height = 0.0;  // height at which the branch became one cluster

  /// Interval producing kb clusters inside the branch, capped by the root.
  std::pair<double, double> interval(std::size_t kb, double root_height) const {
    const std::size_t applied = leaves - kb;
    const double lower = applied == 0 ? 0.0 : heights(applied - 1);
    const double upper = kb == 1 ? root_height : heights(applied);
    return {lower, upper};
  }
  double heights(std::size_t i) const { return merge_heights[i]; }
  std::vector<double> merge_heights;
};

double reference_height(const Dendrogram& tree) {
  double h = 0.0;
  for (const auto& m : tree.merges) {
    if (std::isfinite(m.height)) h = std::max(h, m.height);
  }
  return h > 0.0 ? h : 1.0;
}

}  // namespace

double segment_distance(const SegmentStats& a, const SegmentStats& b) {
  if (a.n < 2 || b.n < 2) throw std::invalid_argument("segment_distance needs at least two points per segment");
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double n = na + nb;
  const double va = a.variance();
  const double vb = b.variance();
  const double dm = a.mean - b.mean;
  // pooled second moment about the pooled mean
  const double pooled = (na * va + nb * vb) / n + na * nb * dm * dm / (n * n);
  if (!(va > kVarianceFloor) || !(vb > kVarianceFloor) || !(pooled > kVarianceFloor)) return kInf;
  return js_divergence_from_variances(a.n + b.n, a.n, pooled, va, vb);
}

DistanceMatrix distance_matrix_serial(std::span<const SegmentStats> segments) {
  DistanceMatrix d(segments.size());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (std::size_t j = i + 1; j < segments.size(); ++j) d.set(i, j, segment_distance(segments[i], segments[j]));
  }
  return d;
}

DistanceMatrix distance_matrix(std::span<const SegmentStats> segments) {
  const auto n = static_cast<std::ptrdiff_t>(segments.size());
  DistanceMatrix d(segments.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      d.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j),
            segment_distance(segments[static_cast<std::size_t>(i)], segments[static_cast<std::size_t>(j)]));
    }
  }
  return d;
}

Dendrogram complete_link(const DistanceMatrix& d) {
  const std::size_t n = d.size();
  if (n < 2) throw std::invalid_argument("complete_link needs at least two segments");
  Dendrogram tree;
  tree.leaves = n;
  // working distances between active clusters, indexed by slot
  std::vector<double> dist(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[i * n + j] = d(i, j);
  }
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), 0);
  std::vector<std::size_t> size(n, 1);
  std::vector<char> active(n, 1);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = kInf;
    bool found = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        const double v = dist[i * n + j];
        const auto lo = std::min(id[i], id[j]);
        const auto hi = std::max(id[i], id[j]);
        const auto blo = std::min(id[bi], id[bj]);
        const auto bhi = std::max(id[bi], id[bj]);
        if (!found || v < best || (v == best && std::pair(lo, hi) < std::pair(blo, bhi))) {
          best = v;
          bi = i;
          bj = j;
          found = true;
        }
      }
    }
    Merge m;
    m.a = std::min(id[bi], id[bj]);
    m.b = std::max(id[bi], id[bj]);
    m.height = best;
    m.size = size[bi] + size[bj];
    tree.merges.push_back(m);
    // the merged cluster lives in slot bi
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double v = std::max(dist[bi * n + k], dist[bj * n + k]);
      dist[bi * n + k] = v;
      dist[k * n + bi] = v;
    }
    active[bj] = 0;
    size[bi] = m.size;
    id[bi] = n + step;
  }
  return tree;
}

Dendrogram complete_link(std::span<const SegmentStats> segments) { return complete_link(distance_matrix(segments)); }

std::vector<std::size_t> cut_after(const Dendrogram& tree, std::size_t merges) {
  if (merges > tree.merges.size()) throw std::invalid_argument("cut beyond the last merge");
  std::vector<std::size_t> ids(merges);
  std::iota(ids.begin(), ids.end(), 0);
  return apply_merges(tree, ids);
}

ExtractionPolicy parse_policy(const std::string& name) {
  if (name == "uniform") return ExtractionPolicy::uniform;
  if (name == "per-branch" || name == "per_branch") return ExtractionPolicy::per_branch;
  throw std::invalid_argument(fmt::format("unknown extraction policy '{}'", name));
}

const char* to_string(ExtractionPolicy policy) {
  return policy == ExtractionPolicy::uniform ? "uniform" : "per-branch";
}

const char* color_name(Color c) {
  switch (c) {
    case Color::black: return "black";
    case Color::blue: return "blue";
    case Color::green: return "green";
    case Color::yellow: return "yellow";
    case Color::orange: return "orange";
    case Color::red: return "red";
  }
  return "?";
}

Color parse_color(const std::string& name) {
  for (Color c : kLadder) {
    if (name == color_name(c)) return c;
  }
  throw DataError(fmt::format("unknown color '{}'", name));
}

const char* volatility_class(Color c) {
  switch (c) {
    case Color::black: return "extremely low";
    case Color::blue: return "low";
    case Color::green: return "moderate";
    case Color::yellow: return "high";
    case Color::orange: return "very high";
    case Color::red: return "extremely high";
  }
  return "?";
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::growth: return "growth";
    case Phase::correction: return "correction";
    case Phase::crisis: return "crisis";
    case Phase::crash: return "crash";
  }
  return "?";
}

Phase phase_of(Color c) {
  switch (c) {
    case Color::black:
    case Color::blue: return Phase::growth;
    case Color::green: return Phase::correction;
    case Color::yellow:
    case Color::orange: return Phase::crisis;
    case Color::red: return Phase::crash;
  }
  return Phase::growth;
}

Extraction extract_clusters(const Dendrogram& tree, std::size_t k_min, std::size_t k_max, ExtractionPolicy policy) {
  const std::size_t n = tree.leaves;
  if (k_min > k_max) throw std::invalid_argument("empty k range");
  if (k_min < 2 || k_max > n) {
    throw std::invalid_argument(fmt::format("k range [{}, {}] outside [2, {}]", k_min, k_max, n));
  }
  const double href = reference_height(tree);
  Extraction ex;
  ex.policy = policy;

  if (policy == ExtractionPolicy::uniform) {
    for (std::size_t k = k_min; k <= k_max; ++k) {
      KRobustness r;
      r.k = k;
      r.lower = k == n ? 0.0 : tree.merges[n - k - 1].height;
      r.upper = tree.merges[n - k].height;
      r.score = (r.upper - r.lower) / href;
      ex.report.push_back(r);
    }
  } else {
    const auto& root = tree.merges.back();
    Branch br[2];
    for (int side = 0; side < 2; ++side) {
      const std::size_t node = side == 0 ? root.a : root.b;
      collect_subtree(tree, node, br[side].merges, br[side].leaves);
      std::sort(br[side].merges.begin(), br[side].merges.end());
      for (auto i : br[side].merges) br[side].merge_heights.push_back(tree.merges[i].height);
      br[side].height = node < n ? 0.0 : tree.merges[node - n].height;
    }
    for (std::size_t k = k_min; k <= k_max; ++k) {
      KRobustness best;
      best.k = k;
      best.score = -1.0;
      for (std::size_t ka = 1; ka <= br[0].leaves && ka < k; ++ka) {
        const std::size_t kb = k - ka;
        if (kb > br[1].leaves) continue;
        const auto ia = br[0].interval(ka, root.height);
        const auto ib = br[1].interval(kb, root.height);
        const double wa = ia.second - ia.first;
        const double wb = ib.second - ib.first;
        const double score = std::min(wa, wb) / href;
        if (score > best.score) {
          best.score = score;
          best.lower = wa <= wb ? ia.first : ib.first;
          best.upper = wa <= wb ? ia.second : ib.second;
          best.branch_k = {ka, kb};
        }
      }
      ex.report.push_back(best);
    }
  }

  const auto pick = std::max_element(ex.report.begin(), ex.report.end(),
                                     [](const KRobustness& a, const KRobustness& b) { return a.score < b.score; });
  ex.chosen_k = pick->k;

  auto& as = ex.assignment;
  as.k = ex.chosen_k;
  if (policy == ExtractionPolicy::uniform) {
    as.cluster_of = cut_after(tree, n - ex.chosen_k);
  } else {
    // redo the subtree walk for the chosen split
    const auto& root = tree.merges.back();
    std::vector<std::size_t> chosen;
    for (int side = 0; side < 2; ++side) {
      std::vector<std::size_t> merges;
      std::size_t leaves = 0;
      collect_subtree(tree, side == 0 ? root.a : root.b, merges, leaves);
      std::sort(merges.begin(), merges.end());
      const std::size_t apply = leaves - pick->branch_k[static_cast<std::size_t>(side)];
      chosen.insert(chosen.end(), merges.begin(), merges.begin() + static_cast<std::ptrdiff_t>(apply));
    }
    as.cluster_of = apply_merges(tree, chosen);
  }
  return ex;
}

ClusterAssignment assign_phases(ClusterAssignment as, std::span<const SegmentStats> segments,
                                std::span<const std::size_t> segment_starts, VolatilityWeighting weighting) {
  if (as.cluster_of.size() != segments.size()) throw std::invalid_argument("assignment and segments differ in size");
  if (!segment_starts.empty() && segment_starts.size() != segments.size()) {
    throw std::invalid_argument("segment starts and segments differ in size");
  }
  const std::size_t k = as.k;
  std::vector<double> num(k, 0.0), den(k, 0.0);
  std::vector<std::size_t> earliest(k, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto c = as.cluster_of[i];
    const double w = weighting == VolatilityWeighting::by_length ? static_cast<double>(segments[i].n) : 1.0;
    num[c] += w * segments[i].stdev;
    den[c] += w;
    earliest[c] = std::min(earliest[c], segment_starts.empty() ? i : segment_starts[i]);
  }
  std::vector<double> mean(k);
  for (std::size_t c = 0; c < k; ++c) mean[c] = num[c] / den[c];

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (mean[a] != mean[b]) return mean[a] < mean[b];
    return earliest[a] < earliest[b];
  });
  for (std::size_t r = 1; r < k; ++r) {
    if (mean[order[r]] == mean[order[r - 1]]) {
      as.warnings.push_back(fmt::format("clusters tie at mean volatility {}; ordered by earliest segment", mean[order[r]]));
    }
  }
  std::vector<std::size_t> rank(k);
  for (std::size_t r = 0; r < k; ++r) rank[order[r]] = r;
  for (auto& c : as.cluster_of) c = rank[c];

  as.mean_volatility.resize(k);
  as.color.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    as.mean_volatility[r] = mean[order[r]];
    std::size_t idx;
    if (k == 1) {
      idx = 1;
    } else if (k <= kLadderSize) {
      idx = kLadderSize - k + r;
    } else {
      idx = r + kLadderSize >= k ? r + kLadderSize - k : 0;
    }
    as.color[r] = kLadder[idx];
  }
  if (k == 1) {
    as.warnings.push_back("single cluster: labelled low volatility (growth)");
  } else if (k < 4 || k > kLadderSize) {
    as.warnings.push_back(fmt::format("{} clusters: phases assigned from the nearest ladder suffix", k));
  }
  return as;
}

namespace {

nlohmann::ordered_json subtree_json(const Dendrogram& tree, std::size_t node) {
  nlohmann::ordered_json j;
  j["id"] = node;
  if (node < tree.leaves) {
    j["segment"] = node + 1;
    return j;
  }
  const auto& m = tree.merges[node - tree.leaves];
  j["height"] = std::isfinite(m.height) ? nlohmann::ordered_json(m.height) : nlohmann::ordered_json("inf");
  j["size"] = m.size;
  j["children"] = {subtree_json(tree, m.a), subtree_json(tree, m.b)};
  return j;
}

}  // namespace

void write_dendrogram_json(std::ostream& out, const Dendrogram& tree, const Extraction& extraction) {
  nlohmann::ordered_json j;
  j["leaves"] = tree.leaves;
  j["policy"] = to_string(extraction.policy);
  j["chosen_k"] = extraction.chosen_k;
  auto& rob = j["robustness"] = nlohmann::ordered_json::array();
  for (const auto& r : extraction.report) {
    nlohmann::ordered_json e{{"k", r.k}, {"lower", r.lower}, {"upper", r.upper}, {"score", r.score}};
    if (!r.branch_k.empty()) e["branch_k"] = r.branch_k;
    rob.push_back(std::move(e));
  }
  j["tree"] = tree.merges.empty() ? subtree_json(tree, 0) : subtree_json(tree, tree.leaves + tree.merges.size() - 1);
  out << j.dump(1) << '\n';
}

void write_merges_csv(std::ostream& out, const Dendrogram& tree) {
  out << "step,a,b,height,size\n";
  for (std::size_t i = 0; i < tree.merges.size(); ++i) {
    const auto& m = tree.merges[i];
    out << i + 1 << ',' << m.a << ',' << m.b << ',' << csv::format_number(m.height) << ',' << m.size << '\n';
  }
}

void write_assignment_csv(std::ostream& out, const ClusterAssignment& as) {
  out << "segment,cluster,color,phase\n";
  for (std::size_t i = 0; i < as.cluster_of.size(); ++i) {
    const Color c = as.color_of_segment(i);
    out << i + 1 << ',' << as.cluster_of[i] << ',' << color_name(c) << ',' << phase_name(phase_of(c)) << '\n';
  }
}

std::vector<AssignmentRow> read_assignment_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const auto c_seg = table.column("segment");
  const auto c_cl = table.column("cluster");
  const auto c_col = table.column("color");
  std::vector<AssignmentRow> rows;
  for (const auto& f : table.rows()) {
    rows.push_back({csv::parse_count(f[c_seg]), csv::parse_count(f[c_cl]), parse_color(f[c_col])});
  }
  return rows;
}

}  // namespace jsseg
