#pragma once

// Reference implementations used to cross-check the library. They are written
// for clarity, not speed, and share no code with src/.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// ---- aggregation table, transcribed entry by entry ------------------------

inline double kd(int x, int y) { return x == y ? 1.0 : 0.0; }

struct Scores {
  double agree = NAN;
  double orth = NAN;
  double dis = NAN;
};

inline Scores table_s(int s1, int s2) { return {kd(s1, s2), NAN, 1 - kd(s1, s2)}; }

inline Scores table_s0(int s1, int s2) {
  return {kd(s1, s2) * (1 - kd(s1, 0)), std::min(kd(s1, 0) + kd(s2, 0), 1.0),
          (1 - kd(s1, s2)) * (1 - kd(s1, 0)) * (1 - kd(s2, 0))};
}

inline Scores table_sd(int s1, int s2) {
  Scores z = table_s0(s1, s2);
  return {z.agree - z.dis, NAN, z.dis - z.agree};
}

// rows are {against, neutral, favor}
using Row = std::array<double, 3>;

inline Scores table_p(const Row& p1, const Row& p2) {
  double agree = p1[0] * p2[0] + p1[1] * p2[1] + p1[2] * p2[2];
  double dis = 0.5 * (std::fabs(p1[0] - p2[0]) + std::fabs(p1[1] - p2[1]) + std::fabs(p1[2] - p2[2]));
  return {agree, NAN, dis};
}

inline Scores table_p0(const Row& p1, const Row& p2) {
  double a1 = p1[0], n1 = p1[1], f1 = p1[2];
  double a2 = p2[0], n2 = p2[1], f2 = p2[2];
  return {a1 * a2 + f1 * f2, n1 * n2, 0.5 * (std::fabs(a1 - a2) + std::fabs(f1 - f2))};
}

inline Scores table_pd(const Row& p1, const Row& p2) {
  Scores z = table_p0(p1, p2);
  return {z.agree - z.dis, NAN, z.dis - z.agree};
}

inline Row one_hot_row(int s) {
  Row r{0, 0, 0};
  r[static_cast<std::size_t>(s + 1)] = 1.0;
  return r;
}

// Uniform on the simplex, with occasional exact zeros and one-hot rows.
inline Row random_row(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kind(0, 9);
  int k = kind(rng);
  if (k == 0) return one_hot_row(std::uniform_int_distribution<int>(-1, 1)(rng));
  std::exponential_distribution<double> e(1.0);
  Row r{e(rng), e(rng), e(rng)};
  if (k == 1) r[std::uniform_int_distribution<std::size_t>(0, 2)(rng)] = 0.0;
  double s = r[0] + r[1] + r[2];
  for (auto& x : r) x /= s;
  return r;
}

// ---- stance frequency by direct set counting -------------------------------

inline double frequency(const std::string& concept_label, const std::vector<std::set<std::string>>& side) {
  int hits = 0;
  for (const auto& s : side) {
    if (s.count(concept_label)) ++hits;
  }
  return static_cast<double>(hits) / std::max<std::size_t>(1, side.size());
}

// ---- ROC AUC by pair counting ----------------------------------------------

inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::int64_t twice = 0, np = 0, nn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) ++np;
    else ++nn;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / static_cast<double>(2 * np * nn);
}

// ---- minimum-cost paths by enumerating every simple path -------------------

struct SmallGraph {
  std::vector<std::string> labels;          // sorted
  std::vector<std::set<int>> adj;           // undirected
  std::vector<std::int64_t> cost;           // cost of entering each node
};

struct Best {
  std::int64_t cost;
  std::size_t edges;
  std::vector<std::string> seq;
  bool operator<(const Best& o) const {
    if (cost != o.cost) return cost < o.cost;
    if (edges != o.edges) return edges < o.edges;
    return seq < o.seq;
  }
};

inline void enumerate(const SmallGraph& g, int at, int target, std::vector<int>& path, std::vector<bool>& used,
                      std::optional<Best>& best) {
  if (at == target) {
    Best b{0, path.size() - 1, {}};
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0) b.cost += g.cost[static_cast<std::size_t>(path[i])];
      b.seq.push_back(g.labels[static_cast<std::size_t>(path[i])]);
    }
    if (!best || b < *best) best = b;
    return;
  }
  for (int v : g.adj[static_cast<std::size_t>(at)]) {
    if (used[static_cast<std::size_t>(v)]) continue;
    used[static_cast<std::size_t>(v)] = true;
    path.push_back(v);
    enumerate(g, v, target, path, used, best);
    path.pop_back();
    used[static_cast<std::size_t>(v)] = false;
  }
}

inline std::optional<Best> best_path(const SmallGraph& g, int from, int to) {
  std::vector<int> path{from};
  std::vector<bool> used(g.labels.size(), false);
  used[static_cast<std::size_t>(from)] = true;
  std::optional<Best> best;
  enumerate(g, from, to, path, used, best);
  return best;
}

// Anchors plus every node on the chosen path between each anchor pair,
// searching from the smaller label.
inline std::set<std::string> connect(const SmallGraph& g, const std::vector<int>& anchors) {
  std::set<std::string> out;
  for (int a : anchors) out.insert(g.labels[static_cast<std::size_t>(a)]);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      int a = std::min(anchors[i], anchors[j]);
      int b = std::max(anchors[i], anchors[j]);
      if (auto best = best_path(g, a, b)) out.insert(best->seq.begin(), best->seq.end());
    }
  }
  return out;
}

}  // namespace oracle
