#pragma once

// Case-study summaries over scored argument pairs.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psv/aggregate.hpp"

namespace psv {

struct ReportPair {
  std::string topic_id;
  bool same_stance = false;
  PairScores scores;
};

struct GroupCell {
  std::string g1;
  std::string g2;
  std::optional<double> value;  // nullopt: no pair links the two groups
  std::size_t n_pairs = 0;
};

// Directed cell (g1, g2) averages pairs whose arg1 carries g1 and arg2 carries
// g2; the reported cell is the mean of both directions, or the one direction
// that has pairs. An argument with several groups counts for each of them.
// Returns |groups|^2 cells, row-major in the given group order.
std::vector<GroupCell> stakeholder_matrix(std::span<const ReportPair> pairs,
                                          const std::map<std::string, std::vector<std::string>>& groups_of,
                                          const std::vector<std::string>& groups, Channel channel);

enum class PairSubset { all, same_stance, cross_stance };
std::string_view to_string(PairSubset s);
bool in_subset(const ReportPair& pair, PairSubset subset);

struct RankedConcept {
  std::string concept_label;
  double mean = 0.0;
  std::size_t n_pairs = 0;
};

// Concepts ranked by mean per-concept score (descending, ties by label).
// `concepts` gives the labels in per-concept vector order.
std::vector<RankedConcept> top_perspectives(std::span<const ReportPair> pairs, const std::vector<std::string>& concepts,
                                            Channel channel, PairSubset subset, std::size_t n);

struct HistogramBin {
  bool same_stance = false;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

// Global scores binned with width w, bin index floor(v / w + 1e-9). Both
// stance groups share one contiguous bin range, empty bins included.
std::vector<HistogramBin> histogram(std::span<const ReportPair> pairs, Channel channel, double width);

}  // namespace psv
