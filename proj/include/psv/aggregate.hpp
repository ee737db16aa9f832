#pragma once

// Acceptability scores between two PSVs.
//
// Six families, per concept i with stances s1, s2 or probability rows p1, p2
// (columns against, neutral, favor) and Kronecker delta d(x, y):
//
//   S   agreement  d(s1,s2)                   disagreement 1 - d(s1,s2)
//   S0  agreement  d(s1,s2)(1-d(s1,0))
//       orthogonal min(d(s1,0) + d(s2,0), 1)
//       disagree   (1-d(s1,s2))(1-d(s1,0))(1-d(s2,0))
//   SD  agreement  S0+ - S0-                  disagreement S0- - S0+
//   P   agreement  sum_j p1j p2j              disagreement 1/2 sum_j |p1j - p2j|
//   P0  agreement  p1a p2a + p1f p2f          orthogonal p1n p2n
//       disagree   1/2 (|p1a - p2a| + |p1f - p2f|)
//   PD  agreement  P0+ - P0-                  disagreement P0- - P0+
//
// Only S0 and P0 define an orthogonality channel. Global scores are the
// arithmetic mean over the signature's concepts.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psv/stance.hpp"

namespace psv {

enum class Family { S, S0, SD, P, P0, PD };
enum class Channel { agreement, orthogonality, disagreement };

std::string_view to_string(Family f);
std::string_view to_string(Channel c);
Family parse_family(std::string_view s);
Channel parse_channel(std::string_view s);

inline constexpr std::array<Family, 6> kAllFamilies = {Family::S, Family::S0, Family::SD,
                                                       Family::P, Family::P0, Family::PD};
inline constexpr std::array<Channel, 3> kAllChannels = {Channel::agreement, Channel::orthogonality,
                                                        Channel::disagreement};

bool is_discrete(Family f);
bool has_channel(Family f, Channel c);
std::vector<Channel> channels_of(Family f);

class ChannelUndefinedError : public Error {
 public:
  ChannelUndefinedError(Family f, Channel c);
};

struct TwoChannel {
  double agreement;
  double disagreement;
};

struct ThreeChannel {
  double agreement;
  double orthogonality;
  double disagreement;
};

TwoChannel agg_s(StanceValue s1, StanceValue s2);
ThreeChannel agg_s0(StanceValue s1, StanceValue s2);
TwoChannel agg_sd(StanceValue s1, StanceValue s2);

// Probability rows must be valid within 1e-6.
TwoChannel agg_p(const ProbRow& p1, const ProbRow& p2);
ThreeChannel agg_p0(const ProbRow& p1, const ProbRow& p2);
TwoChannel agg_pd(const ProbRow& p1, const ProbRow& p2);

// Per-concept value for one family/channel; throws ChannelUndefinedError.
double concept_score(Family f, Channel c, const PsvPair& v1, const PsvPair& v2, std::size_t i);

struct PairScores {
  std::string arg1_id;
  std::string arg2_id;
  Family family = Family::S;
  std::map<Channel, std::vector<double>> per_concept;
  std::map<Channel, double> global;

  double global_value(Channel c) const;  // throws ChannelUndefinedError
  const std::vector<double>& concept_values(Channel c) const;
};

PairScores pair_scores(const PsvPair& v1, const PsvPair& v2, Family family);

// n x n symmetric matrix of global scores, row-major; diagonal holds self-pairs.
struct ScoreMatrix {
  std::size_t n = 0;
  std::vector<double> values;
  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

ScoreMatrix pairwise_matrix(std::span<const PsvPair> psvs, Family family, Channel channel,
                            std::size_t threads = 1);

}  // namespace psv
