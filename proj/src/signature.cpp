#include "psv/signature.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "psv/util.hpp"

namespace psv {

namespace {

template <typename Fn>
void for_each_pair_row(std::string_view contents, const std::string& source, Fn&& fn) {
  std::istringstream in{std::string(contents)};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (util::trim(line).empty() || line.front() == '#') continue;
    auto f = util::split(line, '\t');
    if (f.size() != 2 || util::trim(f[0]).empty() || util::trim(f[1]).empty()) {
      throw ParseError(source, row, "expected two non-empty tab-separated columns");
    }
    fn(std::string(util::trim(f[0])), std::string(util::trim(f[1])));
  }
}

}  // namespace

LemmaTable parse_lemmas(std::string_view contents, const std::string& source) {
  LemmaTable t;
  for_each_pair_row(contents, source, [&](std::string c, std::string l) { t.insert_or_assign(std::move(c), std::move(l)); });
  return t;
}

HypernymTable parse_hypernyms(std::string_view contents, const std::string& source) {
  HypernymTable t;
  for_each_pair_row(contents, source, [&](std::string l, std::string h) { t[std::move(l)].insert(std::move(h)); });
  return t;
}

LemmaTable load_lemmas(const std::filesystem::path& path) { return parse_lemmas(util::read_file(path), path.string()); }

HypernymTable load_hypernyms(const std::filesystem::path& path) {
  return parse_hypernyms(util::read_file(path), path.string());
}

double stance_frequency(std::string_view concept_label, const AlignedSets& aligned,
                        std::span<const Argument* const> side) {
  std::size_t hits = 0;
  for (const auto* a : side) {
    auto it = aligned.find(a->id);
    if (it == aligned.end()) throw Error("no aligned concepts for argument '" + a->id + "'");
    if (it->second.contains(std::string(concept_label))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::max<std::size_t>(1, side.size()));
}

std::vector<ConceptScore> score_concepts(std::string_view topic_id, const AlignedSets& aligned,
                                         const Corpus& corpus) {
  auto split = split_by_stance(topic_id, corpus);
  std::set<std::string> universe;
  for (const auto* a : corpus.arguments_of(topic_id)) {
    auto it = aligned.find(a->id);
    if (it == aligned.end()) throw Error("no aligned concepts for argument '" + a->id + "'");
    universe.insert(it->second.begin(), it->second.end());
  }
  std::vector<ConceptScore> out;
  out.reserve(universe.size());
  for (const auto& c : universe) {
    double f_pro = stance_frequency(c, aligned, split.pro);
    double f_con = stance_frequency(c, aligned, split.con);
    out.push_back({c, f_pro - f_con, f_con - f_pro});
  }
  return out;
}

std::vector<ConceptScore> dedup_lemmas(std::vector<ConceptScore> scored, const LemmaTable& lemmas) {
  std::map<std::string, std::size_t> best;  // lemma -> index into scored
  for (std::size_t i = 0; i < scored.size(); ++i) {
    const auto& c = scored[i];
    auto it = lemmas.find(c.concept_label);
    std::string lemma;
    if (it == lemmas.end()) {
      spdlog::debug("concept '{}' has no lemma entry; using itself", c.concept_label);
      lemma = c.concept_label;
    } else {
      lemma = it->second;
    }
    auto [pos, inserted] = best.emplace(lemma, i);
    if (inserted) continue;
    const auto& incumbent = scored[pos->second];
    double a = std::abs(c.pro_score);
    double b = std::abs(incumbent.pro_score);
    if (a > b || (a == b && c.concept_label < incumbent.concept_label)) pos->second = i;
  }
  std::vector<bool> keep(scored.size(), false);
  for (const auto& [lemma, idx] : best) keep[idx] = true;
  std::vector<ConceptScore> out;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (keep[i]) out.push_back(std::move(scored[i]));
  }
  return out;
}

std::vector<std::string> Signature::concept_labels() const {
  std::vector<std::string> out;
  out.reserve(concepts.size());
  for (const auto& e : concepts) out.push_back(e.concept_label);
  return out;
}

Signature select_top_k(std::string_view topic_id, const std::vector<ConceptScore>& scored, int k) {
  if (k < 1) throw Error("k must be >= 1");
  std::vector<const ConceptScore*> pro, con, zero;
  for (const auto& c : scored) {
    if (c.pro_score > 0) {
      pro.push_back(&c);
    } else if (c.pro_score < 0) {
      con.push_back(&c);
    } else {
      zero.push_back(&c);
    }
  }
  auto by_pro = [](const ConceptScore* a, const ConceptScore* b) {
    if (a->pro_score != b->pro_score) return a->pro_score > b->pro_score;
    return a->concept_label < b->concept_label;
  };
  auto by_con = [](const ConceptScore* a, const ConceptScore* b) {
    if (a->con_score != b->con_score) return a->con_score > b->con_score;
    return a->concept_label < b->concept_label;
  };
  auto by_label = [](const ConceptScore* a, const ConceptScore* b) { return a->concept_label < b->concept_label; };
  std::sort(pro.begin(), pro.end(), by_pro);
  std::sort(con.begin(), con.end(), by_con);
  std::sort(zero.begin(), zero.end(), by_label);

  auto uk = static_cast<std::size_t>(k);
  if (pro.size() > uk) pro.resize(uk);
  if (con.size() > uk) con.resize(uk);
  std::size_t z = 0;
  while (z < zero.size() && (pro.size() < uk || con.size() < uk)) {
    if (pro.size() < uk) pro.push_back(zero[z++]);
    if (z < zero.size() && con.size() < uk) con.push_back(zero[z++]);
  }

  Signature sig;
  sig.topic_id = std::string(topic_id);
  sig.k = k;
  for (const auto* c : pro) sig.concepts.push_back({c->concept_label, Side::pro, c->pro_score});
  for (const auto* c : con) sig.concepts.push_back({c->concept_label, Side::con, c->con_score});
  for (auto [side, n] : {std::pair{"pro", pro.size()}, std::pair{"con", con.size()}}) {
    if (n < uk) {
      auto msg = std::string(side) + " side has only " + std::to_string(n) + " of k=" + std::to_string(k) +
                 " concepts for topic '" + sig.topic_id + "'";
      spdlog::warn("{}", msg);
      sig.warnings.push_back(std::move(msg));
    }
  }
  sig.candidates = sig.concepts;
  return sig;
}

Signature filter_hypernyms(Signature sig, const HypernymTable& hypernyms, const LemmaTable& lemmas) {
  auto lemma_of = [&](const std::string& c) {
    auto it = lemmas.find(c);
    return it == lemmas.end() ? c : it->second;
  };
  // Transitive hypernym closure of one lemma.
  auto ancestors = [&](const std::string& lemma) {
    std::set<std::string> seen;
    std::deque<std::string> queue{lemma};
    while (!queue.empty()) {
      auto cur = std::move(queue.front());
      queue.pop_front();
      auto it = hypernyms.find(cur);
      if (it == hypernyms.end()) continue;
      for (const auto& h : it->second) {
        if (seen.insert(h).second) queue.push_back(h);
      }
    }
    return seen;
  };

  std::vector<std::string> member_lemmas;
  std::set<std::string> covered;  // lemmas that are hypernyms of some member
  for (const auto& e : sig.concepts) member_lemmas.push_back(lemma_of(e.concept_label));
  for (const auto& l : member_lemmas) {
    for (const auto& h : ancestors(l)) {
      if (h != l) covered.insert(h);
    }
  }
  std::vector<SignatureEntry> kept;
  for (std::size_t i = 0; i < sig.concepts.size(); ++i) {
    const auto& lemma = member_lemmas[i];
    if (!covered.contains(lemma)) kept.push_back(sig.concepts[i]);
  }
  sig.concepts = std::move(kept);
  sig.filters_applied.emplace_back("hypernym");
  return sig;
}

Signature filter_relevance(Signature sig, const DebateTopic& topic, LlmClient& client, std::size_t threads) {
  std::vector<std::optional<bool>> verdicts(sig.concepts.size());
  util::parallel_for(sig.concepts.size(), threads, [&](std::size_t i) {
    verdicts[i] = llm_relevance(client, topic, sig.concepts[i].concept_label);
  });
  std::vector<SignatureEntry> kept;
  for (std::size_t i = 0; i < sig.concepts.size(); ++i) {
    if (!verdicts[i]) {
      spdlog::warn("relevance reply for '{}' on topic {} unparseable; keeping concept", sig.concepts[i].concept_label,
                   topic.id);
      kept.push_back(sig.concepts[i]);
    } else if (*verdicts[i]) {
      kept.push_back(sig.concepts[i]);
    }
  }
  sig.concepts = std::move(kept);
  sig.filters_applied.emplace_back("relevance");
  return sig;
}

}  // namespace psv
