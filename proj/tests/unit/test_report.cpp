#include <doctest.h>

#include <random>

#include "psv/report.hpp"

using namespace psv;

namespace {

ReportPair rp(const std::string& a, const std::string& b, double v, bool same = false,
              std::vector<double> per = {}) {
  ReportPair p;
  p.topic_id = "t";
  p.same_stance = same;
  p.scores.arg1_id = a;
  p.scores.arg2_id = b;
  p.scores.family = Family::P0;
  p.scores.global[Channel::disagreement] = v;
  p.scores.per_concept[Channel::disagreement] = per.empty() ? std::vector<double>{v} : per;
  return p;
}

const GroupCell& cell(const std::vector<GroupCell>& m, const std::string& g1, const std::string& g2) {
  for (const auto& c : m)
    if (c.g1 == g1 && c.g2 == g2) return c;
  throw Error("no cell");
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("stakeholder matrix by hand") {
    std::vector<ReportPair> pairs{rp("a", "b", 0.2), rp("a", "c", 0.6), rp("b", "c", 0.4), rp("a", "d", 1.0)};
    std::map<std::string, std::vector<std::string>> groups_of{
        {"a", {"X"}}, {"b", {"Y"}}, {"c", {"X", "Y"}}, {"d", {"Z"}}};
    auto m = stakeholder_matrix(pairs, groups_of, {"X", "Y", "Z"}, Channel::disagreement);
    REQUIRE(m.size() == 9);
    CHECK(m[0].g1 == "X");
    CHECK(m[1].g2 == "Y");
    CHECK(*cell(m, "X", "X").value == doctest::Approx(0.6));
    CHECK(cell(m, "X", "X").n_pairs == 1);
    CHECK(*cell(m, "X", "Y").value == doctest::Approx(0.4));
    CHECK(cell(m, "X", "Y").n_pairs == 3);
    CHECK(*cell(m, "Y", "Y").value == doctest::Approx(0.4));
    CHECK(*cell(m, "X", "Z").value == doctest::Approx(1.0));
    CHECK(*cell(m, "Z", "X").value == doctest::Approx(1.0));
    CHECK(cell(m, "Z", "X").n_pairs == 1);
    CHECK_FALSE(cell(m, "Z", "Z").value);
    CHECK(cell(m, "Z", "Z").n_pairs == 0);
    // symmetric
    for (const auto& c : m) {
      const auto& t = cell(m, c.g2, c.g1);
      CHECK(c.value.has_value() == t.value.has_value());
      if (c.value) CHECK(*c.value == doctest::Approx(*t.value));
    }
  }

  TEST_CASE("top perspectives") {
    std::vector<ReportPair> pairs{rp("a", "b", 0.5, true, {0.9, 0.1, 0.5}), rp("a", "c", 0.5, false, {0.1, 0.7, 0.5}),
                                  rp("b", "c", 0.5, false, {0.3, 0.5, 0.5})};
    std::vector<std::string> concepts{"c1", "c2", "c3"};
    auto all = top_perspectives(pairs, concepts, Channel::disagreement, PairSubset::all, 2);
    REQUIRE(all.size() == 2);
    CHECK(all[0].concept_label == "c3");
    CHECK(all[0].mean == doctest::Approx(0.5));
    CHECK(all[1].concept_label == "c1");  // c1 and c2 tie at 1.3/3, label decides
    CHECK(all[1].n_pairs == 3);
    auto cross = top_perspectives(pairs, concepts, Channel::disagreement, PairSubset::cross_stance, 5);
    CHECK(cross.size() == 3);
    CHECK(cross[0].concept_label == "c2");
    CHECK(cross[0].mean == doctest::Approx(0.6));
    auto same = top_perspectives(pairs, concepts, Channel::disagreement, PairSubset::same_stance, 1);
    CHECK(same[0].concept_label == "c1");
    CHECK(to_string(PairSubset::cross_stance) == "cross_stance");
    CHECK(in_subset(pairs[0], PairSubset::same_stance));
  }

  TEST_CASE("histogram bins and conservation") {
    std::vector<ReportPair> pairs{rp("a", "b", 0.0, true), rp("a", "c", 0.02, false), rp("b", "c", 0.059, false),
                                  rp("b", "d", 0.04, true)};
    auto h = histogram(pairs, Channel::disagreement, 0.02);
    // two groups x bins 0..2
    REQUIRE(h.size() == 6);
    CHECK(h[0].same_stance);
    CHECK(h[0].lo == 0.0);
    CHECK(h[0].hi == doctest::Approx(0.02));
    CHECK(h[0].count == 1);
    CHECK(h[1].count == 0);
    CHECK(h[2].count == 1);
    CHECK_FALSE(h[3].same_stance);
    CHECK(h[4].count == 1);  // 0.02 lands on its own lower edge
    CHECK(h[5].count == 1);

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<ReportPair> many;
    for (int i = 0; i < 300; ++i) many.push_back(rp("x", "y", u(rng), i % 2 == 0));
    std::size_t total = 0;
    for (const auto& b : histogram(many, Channel::disagreement, 0.05)) {
      total += b.count;
      CHECK(b.hi > b.lo);
    }
    CHECK(total == 300);
    CHECK_THROWS_AS(histogram(many, Channel::disagreement, 0.0), Error);
  }
}
