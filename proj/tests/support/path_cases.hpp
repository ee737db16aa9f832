#pragma once

// Random small graphs for cross-checking connect_paths against exhaustive
// enumeration.

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "psv/graph.hpp"

namespace cases {

struct PathCase {
  psv::ConceptGraph graph;
  psv::EmbeddingStore store;
  std::vector<double> argument;
  std::set<std::string> anchors;
  oracle::SmallGraph small;
  std::vector<int> anchor_ids;
};

inline double naive_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / std::sqrt(na * nb);
}

// Up to 8 nodes, sparse or dense edges, vectors with small integer entries so
// that equal costs (and so tie-breaking) are common. Some nodes lack vectors.
inline PathCase random_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nodes(2, 8), coord(-1, 1), pct(0, 99);
  int n = nodes(rng);
  int density = 15 + pct(rng) % 60;
  PathCase c;
  std::vector<std::string> labels;
  for (int i = 0; i < n; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));

  std::vector<psv::RawEdge> edges;
  c.small.labels = labels;
  c.small.adj.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (pct(rng) >= density) continue;
      bool flip = pct(rng) % 2;
      edges.push_back({"RelatedTo", labels[static_cast<std::size_t>(flip ? j : i)],
                       labels[static_cast<std::size_t>(flip ? i : j)], 1.0});
      c.small.adj[static_cast<std::size_t>(i)].insert(j);
      c.small.adj[static_cast<std::size_t>(j)].insert(i);
    }
  }
  // isolated nodes still have to exist in the graph
  for (int i = 0; i < n; ++i) {
    if (c.small.adj[static_cast<std::size_t>(i)].empty()) {
      edges.push_back({"Self", labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(i)], 1.0});
    }
  }
  c.graph = psv::ConceptGraph::from_edges(edges);
  for (int i = 0; i < n; ++i) {
    if (!c.graph.contains(labels[static_cast<std::size_t>(i)])) {
      // a self-loop-only node is dropped together with its loop
      c.small.adj[static_cast<std::size_t>(i)].clear();
    }
  }

  auto random_vec = [&] {
    std::vector<double> v(3, 0.0);
    while (v[0] == 0 && v[1] == 0 && v[2] == 0) {
      for (auto& x : v) x = coord(rng);
    }
    return v;
  };
  c.argument = random_vec();
  c.small.cost.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    double cost = 1.0;
    if (pct(rng) < 80) {
      auto v = random_vec();
      cost = std::clamp(1.0 - naive_cosine(v, c.argument), 0.0, 2.0);
      c.store.add(labels[static_cast<std::size_t>(i)], v);
    }
    c.small.cost[static_cast<std::size_t>(i)] = std::llround(cost * 1e9);
  }

  std::vector<int> present;
  for (int i = 0; i < n; ++i) {
    if (c.graph.contains(labels[static_cast<std::size_t>(i)])) present.push_back(i);
  }
  for (int i : present) {
    if (pct(rng) < 45) c.anchor_ids.push_back(i);
  }
  if (c.anchor_ids.size() < 2 && present.size() >= 2) {
    c.anchor_ids = {present.front(), present.back()};
  }
  for (int i : c.anchor_ids) c.anchors.insert(labels[static_cast<std::size_t>(i)]);
  return c;
}

// Empty string when connect_paths agrees with enumeration, else a description.
inline std::string check(const PathCase& c) {
  if (c.anchors.empty()) return {};
  auto got = psv::connect_paths(c.graph, c.anchors, c.argument, c.store);
  auto want = oracle::connect(c.small, c.anchor_ids);
  if (got.concepts == want) return {};
  std::ostringstream os;
  os << "anchors {";
  for (const auto& a : c.anchors) os << a << ' ';
  os << "} got {";
  for (const auto& a : got.concepts) os << a << ' ';
  os << "} want {";
  for (const auto& a : want) os << a << ' ';
  os << "}";
  return os.str();
}

}  // namespace cases
