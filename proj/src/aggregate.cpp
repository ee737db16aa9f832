#include "psv/aggregate.hpp"

#include <cmath>

#include "psv/util.hpp"

namespace psv {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::S: return "S";
    case Family::S0: return "S0";
    case Family::SD: return "SD";
    case Family::P: return "P";
    case Family::P0: return "P0";
    case Family::PD: return "PD";
  }
  return "?";
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::agreement: return "agreement";
    case Channel::orthogonality: return "orthogonality";
    case Channel::disagreement: return "disagreement";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  for (auto f : kAllFamilies) {
    if (to_string(f) == s) return f;
  }
  throw Error("unknown aggregation family '" + std::string(s) + "' (S|S0|SD|P|P0|PD)");
}

Channel parse_channel(std::string_view s) {
  for (auto c : kAllChannels) {
    if (to_string(c) == s) return c;
  }
  throw Error("unknown channel '" + std::string(s) + "' (agreement|orthogonality|disagreement)");
}

bool is_discrete(Family f) { return f == Family::S || f == Family::S0 || f == Family::SD; }

bool has_channel(Family f, Channel c) {
  return c != Channel::orthogonality || f == Family::S0 || f == Family::P0;
}

std::vector<Channel> channels_of(Family f) {
  std::vector<Channel> out;
  for (auto c : kAllChannels) {
    if (has_channel(f, c)) out.push_back(c);
  }
  return out;
}

ChannelUndefinedError::ChannelUndefinedError(Family f, Channel c)
    : Error("channel " + std::string(to_string(c)) + " is not defined for family " + std::string(to_string(f))) {}

namespace {

double delta(StanceValue a, StanceValue b) { return a == b ? 1.0 : 0.0; }

void check_rows(const ProbRow& p1, const ProbRow& p2) {
  validate_row(p1, 1e-6);
  validate_row(p2, 1e-6);
}

}  // namespace

TwoChannel agg_s(StanceValue s1, StanceValue s2) {
  double d = delta(s1, s2);
  return {d, 1.0 - d};
}

ThreeChannel agg_s0(StanceValue s1, StanceValue s2) {
  double same = delta(s1, s2);
  double n1 = delta(s1, StanceValue::neutral);
  double n2 = delta(s2, StanceValue::neutral);
  return {same * (1.0 - n1), std::min(n1 + n2, 1.0), (1.0 - same) * (1.0 - n1) * (1.0 - n2)};
}

TwoChannel agg_sd(StanceValue s1, StanceValue s2) {
  auto t = agg_s0(s1, s2);
  return {t.agreement - t.disagreement, t.disagreement - t.agreement};
}

TwoChannel agg_p(const ProbRow& p1, const ProbRow& p2) {
  check_rows(p1, p2);
  double agree = 0.0, diff = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    agree += p1[j] * p2[j];
    diff += std::abs(p1[j] - p2[j]);
  }
  return {agree, 0.5 * diff};
}

ThreeChannel agg_p0(const ProbRow& p1, const ProbRow& p2) {
  check_rows(p1, p2);
  return {p1[kAgainst] * p2[kAgainst] + p1[kFavor] * p2[kFavor], p1[kNeutral] * p2[kNeutral],
          0.5 * (std::abs(p1[kAgainst] - p2[kAgainst]) + std::abs(p1[kFavor] - p2[kFavor]))};
}

TwoChannel agg_pd(const ProbRow& p1, const ProbRow& p2) {
  auto t = agg_p0(p1, p2);
  return {t.agreement - t.disagreement, t.disagreement - t.agreement};
}

double concept_score(Family f, Channel c, const PsvPair& v1, const PsvPair& v2, std::size_t i) {
  if (!has_channel(f, c)) throw ChannelUndefinedError(f, c);
  auto pick2 = [c](TwoChannel t) { return c == Channel::agreement ? t.agreement : t.disagreement; };
  auto pick3 = [c](ThreeChannel t) {
    switch (c) {
      case Channel::agreement: return t.agreement;
      case Channel::orthogonality: return t.orthogonality;
      case Channel::disagreement: return t.disagreement;
    }
    return 0.0;
  };
  const auto& s1 = v1.discrete.values;
  const auto& s2 = v2.discrete.values;
  const auto& p1 = v1.prob.rows;
  const auto& p2 = v2.prob.rows;
  switch (f) {
    case Family::S: return pick2(agg_s(s1.at(i), s2.at(i)));
    case Family::S0: return pick3(agg_s0(s1.at(i), s2.at(i)));
    case Family::SD: return pick2(agg_sd(s1.at(i), s2.at(i)));
    case Family::P: return pick2(agg_p(p1.at(i), p2.at(i)));
    case Family::P0: return pick3(agg_p0(p1.at(i), p2.at(i)));
    case Family::PD: return pick2(agg_pd(p1.at(i), p2.at(i)));
  }
  return 0.0;
}

double PairScores::global_value(Channel c) const {
  auto it = global.find(c);
  if (it == global.end()) throw ChannelUndefinedError(family, c);
  return it->second;
}

const std::vector<double>& PairScores::concept_values(Channel c) const {
  auto it = per_concept.find(c);
  if (it == per_concept.end()) throw ChannelUndefinedError(family, c);
  return it->second;
}

namespace {

std::size_t check_compatible(const PsvPair& v1, const PsvPair& v2, Family family) {
  if (v1.discrete.signature_ref != v2.discrete.signature_ref) {
    throw Error("PSVs of '" + v1.discrete.argument_id + "' and '" + v2.discrete.argument_id +
                "' use different signatures");
  }
  auto n = is_discrete(family) ? v1.discrete.values.size() : v1.prob.rows.size();
  auto m = is_discrete(family) ? v2.discrete.values.size() : v2.prob.rows.size();
  if (n != m) throw Error("PSV dimensions differ: " + std::to_string(n) + " vs " + std::to_string(m));
  if (n == 0) throw Error("cannot score PSVs over an empty signature");
  return n;
}

}  // namespace

PairScores pair_scores(const PsvPair& v1, const PsvPair& v2, Family family) {
  auto n = check_compatible(v1, v2, family);
  PairScores out;
  out.arg1_id = v1.discrete.argument_id;
  out.arg2_id = v2.discrete.argument_id;
  out.family = family;
  for (auto c : channels_of(family)) {
    std::vector<double> vals(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = concept_score(family, c, v1, v2, i);
      sum += vals[i];
    }
    out.global[c] = sum / static_cast<double>(n);
    out.per_concept[c] = std::move(vals);
  }
  return out;
}

ScoreMatrix pairwise_matrix(std::span<const PsvPair> psvs, Family family, Channel channel, std::size_t threads) {
  if (!has_channel(family, channel)) throw ChannelUndefinedError(family, channel);
  ScoreMatrix m;
  m.n = psvs.size();
  m.values.assign(m.n * m.n, 0.0);
  // Row i computes j >= i, then mirrors.
  util::parallel_for(m.n, threads, [&](std::size_t i) {
    for (std::size_t j = i; j < m.n; ++j) {
      const auto& a = psvs[i];
      const auto& b = psvs[j];
      auto n = check_compatible(a, b, family);
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += concept_score(family, channel, a, b, k);
      double v = sum / static_cast<double>(n);
      m.values[i * m.n + j] = v;
      m.values[j * m.n + i] = v;
    }
  });
  return m;
}

}  // namespace psv
