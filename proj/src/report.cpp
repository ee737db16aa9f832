#include "psv/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "psv/util.hpp"

namespace psv {

std::vector<GroupCell> stakeholder_matrix(std::span<const ReportPair> pairs,
                                          const std::map<std::string, std::vector<std::string>>& groups_of,
                                          const std::vector<std::string>& groups, Channel channel) {
  const std::size_t g = groups.size();
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < g; ++i) index.emplace(groups[i], i);

  std::vector<double> sum(g * g, 0.0);
  std::vector<std::size_t> count(g * g, 0);
  std::vector<std::set<std::size_t>> members(g * g);
  auto groups_for = [&](const std::string& arg) -> std::vector<std::size_t> {
    std::vector<std::size_t> out;
    auto it = groups_of.find(arg);
    if (it == groups_of.end()) return out;
    for (const auto& name : it->second) {
      auto gi = index.find(name);
      if (gi != index.end()) out.push_back(gi->second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto& s = pairs[p].scores;
    if (s.arg1_id == s.arg2_id) continue;
    double v = s.global_value(channel);
    for (auto a : groups_for(s.arg1_id)) {
      for (auto b : groups_for(s.arg2_id)) {
        sum[a * g + b] += v;
        ++count[a * g + b];
        members[a * g + b].insert(p);
        members[b * g + a].insert(p);
      }
    }
  }

  std::vector<GroupCell> cells;
  cells.reserve(g * g);
  for (std::size_t a = 0; a < g; ++a) {
    for (std::size_t b = 0; b < g; ++b) {
      GroupCell cell{groups[a], groups[b], std::nullopt, members[a * g + b].size()};
      auto ab = a * g + b, ba = b * g + a;
      bool has_ab = count[ab] > 0, has_ba = count[ba] > 0;
      double m_ab = has_ab ? sum[ab] / static_cast<double>(count[ab]) : 0.0;
      double m_ba = has_ba ? sum[ba] / static_cast<double>(count[ba]) : 0.0;
      if (has_ab && has_ba) {
        cell.value = a == b ? m_ab : (m_ab + m_ba) / 2.0;
      } else if (has_ab) {
        cell.value = m_ab;
      } else if (has_ba) {
        cell.value = m_ba;
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string_view to_string(PairSubset s) {
  switch (s) {
    case PairSubset::all: return "all";
    case PairSubset::same_stance: return "same_stance";
    case PairSubset::cross_stance: return "cross_stance";
  }
  return "?";
}

bool in_subset(const ReportPair& pair, PairSubset subset) {
  switch (subset) {
    case PairSubset::all: return true;
    case PairSubset::same_stance: return pair.same_stance;
    case PairSubset::cross_stance: return !pair.same_stance;
  }
  return false;
}

std::vector<RankedConcept> top_perspectives(std::span<const ReportPair> pairs, const std::vector<std::string>& concepts,
                                            Channel channel, PairSubset subset, std::size_t n) {
  std::vector<double> sum(concepts.size(), 0.0);
  std::size_t used = 0;
  for (const auto& p : pairs) {
    if (p.scores.arg1_id == p.scores.arg2_id || !in_subset(p, subset)) continue;
    const auto& vals = p.scores.concept_values(channel);
    if (vals.size() != concepts.size()) throw Error("per-concept scores do not match the concept list");
    for (std::size_t i = 0; i < vals.size(); ++i) sum[i] += vals[i];
    ++used;
  }
  std::vector<RankedConcept> ranked;
  if (used == 0) return ranked;
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    ranked.push_back({concepts[i], sum[i] / static_cast<double>(used), used});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedConcept& a, const RankedConcept& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.concept_label < b.concept_label;
  });
  if (ranked.size() > n) ranked.resize(n);
  return ranked;
}

std::vector<HistogramBin> histogram(std::span<const ReportPair> pairs, Channel channel, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) throw Error("histogram bin width must be positive");
  std::map<long long, std::size_t> same, cross;
  for (const auto& p : pairs) {
    if (p.scores.arg1_id == p.scores.arg2_id) continue;
    auto idx = static_cast<long long>(std::floor(p.scores.global_value(channel) / width + 1e-9));
    ++(p.same_stance ? same : cross)[idx];
  }
  std::vector<HistogramBin> bins;
  if (same.empty() && cross.empty()) return bins;
  long long lo = std::min(same.empty() ? cross.begin()->first : same.begin()->first,
                          cross.empty() ? same.begin()->first : cross.begin()->first);
  long long hi = std::max(same.empty() ? cross.rbegin()->first : same.rbegin()->first,
                          cross.empty() ? same.rbegin()->first : cross.rbegin()->first);
  // Edges are rounded to 1e-9 so that e.g. 3 * 0.02 prints as 0.06.
  auto edge = [width](long long i) { return std::round(static_cast<double>(i) * width * 1e9) / 1e9; };
  for (bool flag : {true, false}) {
    const auto& m = flag ? same : cross;
    for (long long i = lo; i <= hi; ++i) {
      auto it = m.find(i);
      bins.push_back({flag, edge(i), edge(i + 1), it == m.end() ? 0 : it->second});
    }
  }
  return bins;
}

}  // namespace psv
