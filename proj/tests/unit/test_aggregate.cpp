#include <doctest.h>

#include <random>

#include "../support/oracles.hpp"
#include "psv/aggregate.hpp"

using namespace psv;

namespace {

PsvPair make_psv(const std::string& id, const std::vector<int>& values, const std::string& topic = "t") {
  PsvDiscrete d{id, topic, {}};
  for (int v : values) d.values.push_back(stance_from_int(v));
  return {d, to_prob(d)};
}

PsvPair make_prob(const std::string& id, const std::vector<ProbRow>& rows) {
  PsvPair p;
  p.discrete = {id, "t", {}};
  p.prob = {id, "t", rows};
  for (const auto& r : rows) p.discrete.values.push_back(argmax(r));
  return p;
}

const StanceValue kValues[] = {StanceValue::against, StanceValue::neutral, StanceValue::favor};

}  // namespace

TEST_SUITE("aggregate") {
  TEST_CASE("names round-trip") {
    for (auto f : kAllFamilies) CHECK(parse_family(to_string(f)) == f);
    for (auto c : kAllChannels) CHECK(parse_channel(to_string(c)) == c);
    CHECK_THROWS_AS(parse_family("Q"), Error);
    CHECK(has_channel(Family::S0, Channel::orthogonality));
    CHECK(has_channel(Family::P0, Channel::orthogonality));
    CHECK_FALSE(has_channel(Family::SD, Channel::orthogonality));
    CHECK(channels_of(Family::P).size() == 2);
    CHECK(is_discrete(Family::SD));
    CHECK_FALSE(is_discrete(Family::PD));
  }

  TEST_CASE("discrete families against the table on all nine pairs") {
    for (auto a : kValues) {
      for (auto b : kValues) {
        int x = sign(a), y = sign(b);
        auto s = agg_s(a, b);
        auto s0 = agg_s0(a, b);
        auto sd = agg_sd(a, b);
        CHECK(s.agreement == oracle::table_s(x, y).agree);
        CHECK(s.disagreement == oracle::table_s(x, y).dis);
        CHECK(s0.agreement == oracle::table_s0(x, y).agree);
        CHECK(s0.orthogonality == oracle::table_s0(x, y).orth);
        CHECK(s0.disagreement == oracle::table_s0(x, y).dis);
        CHECK(sd.agreement == oracle::table_sd(x, y).agree);
        CHECK(sd.disagreement == oracle::table_sd(x, y).dis);
      }
    }
  }

  TEST_CASE("hand-checked values") {
    auto z = agg_s0(StanceValue::favor, StanceValue::against);
    CHECK(z.agreement == 0.0);
    CHECK(z.orthogonality == 0.0);
    CHECK(z.disagreement == 1.0);
    z = agg_s0(StanceValue::neutral, StanceValue::neutral);
    CHECK(z.orthogonality == 1.0);
    CHECK(agg_sd(StanceValue::favor, StanceValue::favor).agreement == 1.0);
    CHECK(agg_sd(StanceValue::favor, StanceValue::against).agreement == -1.0);

    ProbRow p1{0.2, 0.3, 0.5}, p2{0.5, 0.3, 0.2};
    auto p = agg_p(p1, p2);
    CHECK(p.agreement == doctest::Approx(0.1 + 0.09 + 0.1));
    CHECK(p.disagreement == doctest::Approx(0.3));
    auto p0 = agg_p0(p1, p2);
    CHECK(p0.agreement == doctest::Approx(0.2));
    CHECK(p0.orthogonality == doctest::Approx(0.09));
    CHECK(p0.disagreement == doctest::Approx(0.3));
    auto pd = agg_pd(p1, p2);
    CHECK(pd.agreement == doctest::Approx(-0.1));
    CHECK(pd.disagreement == doctest::Approx(0.1));
  }

  TEST_CASE("probability families against the table on random rows") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
      auto r1 = oracle::random_row(rng), r2 = oracle::random_row(rng);
      ProbRow p1{r1[0], r1[1], r1[2]}, p2{r2[0], r2[1], r2[2]};
      auto p = agg_p(p1, p2);
      auto p0 = agg_p0(p1, p2);
      auto pd = agg_pd(p1, p2);
      CHECK(p.agreement == doctest::Approx(oracle::table_p(r1, r2).agree).epsilon(1e-12));
      CHECK(p.disagreement == doctest::Approx(oracle::table_p(r1, r2).dis).epsilon(1e-12));
      CHECK(p0.agreement == doctest::Approx(oracle::table_p0(r1, r2).agree).epsilon(1e-12));
      CHECK(p0.orthogonality == doctest::Approx(oracle::table_p0(r1, r2).orth).epsilon(1e-12));
      CHECK(p0.disagreement == doctest::Approx(oracle::table_p0(r1, r2).dis).epsilon(1e-12));
      CHECK(pd.agreement == doctest::Approx(oracle::table_pd(r1, r2).agree).epsilon(1e-12));
      CHECK(pd.agreement == doctest::Approx(-pd.disagreement).epsilon(1e-12));
      // symmetric in the two arguments
      CHECK(agg_p0(p2, p1).disagreement == doctest::Approx(p0.disagreement).epsilon(1e-15));
      CHECK(p.agreement >= 0.0);
      CHECK(p.agreement <= 1.0 + 1e-12);
      CHECK(p.disagreement <= 1.0 + 1e-12);
    }
  }

  TEST_CASE("one-hot rows reduce P to S") {
    for (auto a : kValues) {
      for (auto b : kValues) {
        auto p = agg_p(one_hot(a), one_hot(b));
        auto s = agg_s(a, b);
        CHECK(p.agreement == s.agreement);
        CHECK(p.disagreement == s.disagreement);
      }
    }
  }

  TEST_CASE("one-hot P0 departs from S0 when exactly one side is neutral") {
    auto p0 = agg_p0(one_hot(StanceValue::neutral), one_hot(StanceValue::favor));
    auto s0 = agg_s0(StanceValue::neutral, StanceValue::favor);
    CHECK(p0.orthogonality == 0.0);
    CHECK(p0.disagreement == 0.5);
    CHECK(s0.orthogonality == 1.0);
    CHECK(s0.disagreement == 0.0);
    auto both = agg_p0(one_hot(StanceValue::neutral), one_hot(StanceValue::neutral));
    CHECK(both.orthogonality == 1.0);
  }

  TEST_CASE("invalid rows are rejected") {
    CHECK_THROWS_AS(agg_p({0.5, 0.5, 0.5}, {1, 0, 0}), Error);
    CHECK_THROWS_AS(agg_p0({-0.1, 0.6, 0.5}, {1, 0, 0}), Error);
    CHECK_NOTHROW(agg_p({0.3333333, 0.3333333, 0.3333334}, {1, 0, 0}));
  }

  TEST_CASE("worked example with four concepts") {
    // hunting for food, trophy hunting, eating meat, sustainability
    auto a = make_psv("a", {-1, 1, 1, 1});
    auto b = make_psv("b", {-1, 1, 0, -1});
    auto s0 = pair_scores(make_psv("a", {1, 1, 1, -1}), make_psv("b", {-1, 1, 0, -1}), Family::S0);
    CHECK(s0.global_value(Channel::agreement) == 0.5);
    CHECK(s0.global_value(Channel::orthogonality) == 0.25);
    CHECK(s0.global_value(Channel::disagreement) == 0.25);
    CHECK(s0.concept_values(Channel::disagreement) == std::vector<double>{1, 0, 0, 0});
    CHECK(s0.concept_values(Channel::orthogonality) == std::vector<double>{0, 0, 1, 0});
    auto s = pair_scores(a, b, Family::S);
    CHECK(s.global_value(Channel::agreement) == 0.5);
    CHECK_THROWS_AS(s.global_value(Channel::orthogonality), ChannelUndefinedError);
  }

  TEST_CASE("pair_scores checks its inputs") {
    CHECK_THROWS_AS(pair_scores(make_psv("a", {1}, "x"), make_psv("b", {1}, "y"), Family::S), Error);
    CHECK_THROWS_AS(pair_scores(make_psv("a", {1, 0}), make_psv("b", {1}), Family::S), Error);
    CHECK_THROWS_AS(pair_scores(make_psv("a", {}), make_psv("b", {}), Family::S), Error);
    CHECK_THROWS_AS(concept_score(Family::P, Channel::orthogonality, make_psv("a", {1}), make_psv("b", {1}), 0),
                    ChannelUndefinedError);
  }

  TEST_CASE("probability PSVs use their rows, discrete families their values") {
    auto a = make_prob("a", {{0.1, 0.2, 0.7}, {0.6, 0.3, 0.1}});
    auto b = make_prob("b", {{0.2, 0.2, 0.6}, {0.0, 1.0, 0.0}});
    auto p = pair_scores(a, b, Family::P);
    CHECK(p.global_value(Channel::agreement) == doctest::Approx(((0.02 + 0.04 + 0.42) + 0.3) / 2));
    auto s = pair_scores(a, b, Family::S);
    CHECK(s.global_value(Channel::agreement) == 0.5);  // favor=favor, against!=neutral
  }

  TEST_CASE("pairwise matrix is symmetric and matches pair_scores") {
    std::vector<PsvPair> v{make_psv("a", {1, 0, -1}), make_psv("b", {1, 1, -1}), make_psv("c", {-1, 0, 0}),
                           make_psv("d", {0, 0, 0})};
    for (auto f : kAllFamilies) {
      for (auto c : channels_of(f)) {
        auto m1 = pairwise_matrix(v, f, c, 1);
        auto m4 = pairwise_matrix(v, f, c, 4);
        CHECK(m1.values == m4.values);
        for (std::size_t i = 0; i < v.size(); ++i) {
          for (std::size_t j = 0; j < v.size(); ++j) {
            CHECK(m1.at(i, j) == m1.at(j, i));
            CHECK(m1.at(i, j) == pair_scores(v[i], v[j], f).global_value(c));
          }
        }
      }
    }
    CHECK_THROWS_AS(pairwise_matrix(v, Family::SD, Channel::orthogonality), ChannelUndefinedError);
  }
}
