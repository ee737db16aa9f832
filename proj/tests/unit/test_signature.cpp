#include <doctest.h>

#include "../support/fake_llm.hpp"
#include "../support/freq_cases.hpp"
#include "psv/signature.hpp"

using namespace psv;

namespace {

// four pro and four con arguments
struct Fixture {
  Corpus corpus;
  AlignedSets aligned;
  Fixture() {
    corpus.add_topic({"t", "Should it?", {"pro", "con"}});
    std::vector<std::set<std::string>> pro{{"a", "b", "x"}, {"a", "b"}, {"a", "c"}, {"a", "x"}};
    std::vector<std::set<std::string>> con{{"d", "x"}, {"d", "e"}, {"d", "b"}, {"e", "x"}};
    for (std::size_t i = 0; i < 4; ++i) {
      corpus.add_argument({"p" + std::to_string(i), "t", "x", Side::pro, std::nullopt});
      aligned["p" + std::to_string(i)] = pro[i];
      corpus.add_argument({"c" + std::to_string(i), "t", "x", Side::con, std::nullopt});
      aligned["c" + std::to_string(i)] = con[i];
    }
  }
};

const ConceptScore* find(const std::vector<ConceptScore>& v, const std::string& label) {
  for (const auto& c : v)
    if (c.concept_label == label) return &c;
  return nullptr;
}

}  // namespace

TEST_SUITE("signature") {
  TEST_CASE("stance frequency and scores") {
    Fixture f;
    auto split = split_by_stance("t", f.corpus);
    CHECK(stance_frequency("a", f.aligned, split.pro) == 1.0);
    CHECK(stance_frequency("b", f.aligned, split.pro) == 0.5);
    CHECK(stance_frequency("b", f.aligned, split.con) == 0.25);
    std::vector<const Argument*> none;
    CHECK(stance_frequency("a", f.aligned, none) == 0.0);

    auto scored = score_concepts("t", f.aligned, f.corpus);
    CHECK(scored.size() == 6);
    CHECK(find(scored, "a")->pro_score == 1.0);
    CHECK(find(scored, "b")->pro_score == 0.25);
    CHECK(find(scored, "x")->pro_score == 0.0);
    CHECK(find(scored, "d")->con_score == 0.75);
    for (const auto& c : scored) CHECK(c.pro_score == -c.con_score);

    AlignedSets missing = f.aligned;
    missing.erase("c3");
    CHECK_THROWS_AS(score_concepts("t", missing, f.corpus), Error);
  }

  TEST_CASE("stance frequency matches set counting") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
      auto msg = cases::check_frequency(rng);
      CHECK_MESSAGE(msg.empty(), msg);
    }
  }

  TEST_CASE("lemma dedup keeps the stronger surface form") {
    std::vector<ConceptScore> s{{"hunt", 0.4, -0.4}, {"hunting", 0.6, -0.6}, {"deer", -0.2, 0.2}};
    LemmaTable lemmas{{"hunt", "hunt"}, {"hunting", "hunt"}};
    auto d = dedup_lemmas(s, lemmas);
    REQUIRE(d.size() == 2);
    CHECK(d[0].concept_label == "hunting");
    CHECK(d[1].concept_label == "deer");
    // a strong con-side score counts by magnitude; ties go to the smaller label
    std::vector<ConceptScore> t{{"hunt", 0.5, -0.5}, {"hunting", -0.5, 0.5}};
    CHECK(dedup_lemmas(t, lemmas)[0].concept_label == "hunt");
  }

  TEST_CASE("top-k per side") {
    Fixture f;
    auto sig = select_top_k("t", score_concepts("t", f.aligned, f.corpus), 2);
    CHECK(sig.concept_labels() == std::vector<std::string>{"a", "b", "d", "e"});
    CHECK(sig.concepts[0].side == Side::pro);
    CHECK(sig.concepts[2].side == Side::con);
    CHECK(sig.warnings.empty());
    CHECK(sig.dimension() == 4);

    // zero-score concepts fill a short side; a remaining shortfall is flagged
    auto wide = select_top_k("t", score_concepts("t", f.aligned, f.corpus), 3);
    CHECK(wide.concept_labels() == std::vector<std::string>{"a", "b", "c", "d", "e", "x"});
    CHECK(wide.warnings.empty());
    auto short_side = select_top_k("t", score_concepts("t", f.aligned, f.corpus), 4);
    CHECK(short_side.concept_labels() == std::vector<std::string>{"a", "b", "c", "x", "d", "e"});
    CHECK(short_side.warnings.size() == 1);
    CHECK_THROWS_AS(select_top_k("t", {}, 0), Error);
  }

  TEST_CASE("hypernym filter") {
    Signature sig;
    sig.topic_id = "t";
    sig.concepts = {{"animal", Side::pro, 1}, {"dog", Side::pro, 1}, {"cat", Side::con, 1}, {"rock", Side::con, 1}};
    HypernymTable h{{"dog", {"canine"}}, {"canine", {"animal"}}};
    auto out = filter_hypernyms(sig, h, {});
    CHECK(out.concept_labels() == std::vector<std::string>{"dog", "cat", "rock"});
    CHECK(out.filters_applied == std::vector<std::string>{"hypernym"});

    Signature lemmatized;
    lemmatized.concepts = {{"hunting", Side::pro, 1}, {"trophy hunting", Side::con, 1}};
    LemmaTable lemmas{{"hunting", "hunt"}, {"trophy hunting", "trophy_hunt"}};
    HypernymTable lh{{"trophy_hunt", {"hunt"}}};
    CHECK(filter_hypernyms(lemmatized, lh, lemmas).concept_labels() == std::vector<std::string>{"trophy hunting"});
  }

  TEST_CASE("lemma and hypernym files") {
    auto l = parse_lemmas("hunting\thunt\n# c\n\ndogs\tdog\n");
    CHECK(l.at("hunting") == "hunt");
    CHECK(l.size() == 2);
    auto h = parse_hypernyms("dog\tanimal\ndog\tpet\n");
    CHECK(h.at("dog") == std::set<std::string>{"animal", "pet"});
    CHECK_THROWS_AS(parse_lemmas("lonely\n"), ParseError);
  }

  TEST_CASE("relevance filter asks once per concept") {
    fake::ModelTransport t;
    LlmClient client({}, &t, nullptr);
    Signature sig;
    sig.topic_id = "t";
    sig.concepts = {{"gun", Side::pro, 1}, {"deer", Side::pro, 1}, {"parents", Side::con, 1}};
    DebateTopic topic{"t", "Should animal hunting be banned?", {"pro", "con"}};
    auto out = filter_relevance(sig, topic, client, 2);
    CHECK(out.concept_labels() == std::vector<std::string>{"deer"});
    CHECK(t.calls == 3);
    CHECK(out.filters_applied.back() == "relevance");
  }
}
