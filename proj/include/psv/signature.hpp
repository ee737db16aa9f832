#pragma once

// Topic signature induction: stance-specific concept frequencies, pro/con
// normalization, lemma dedup, top-k selection per side and optional filters.

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psv/corpus.hpp"
#include "psv/llm.hpp"

namespace psv {

// argument_id -> aligned concept set C_a
using AlignedSets = std::map<std::string, std::set<std::string>, std::less<>>;
// concept -> lemma
using LemmaTable = std::map<std::string, std::string, std::less<>>;
// lemma -> hypernym lemmas
using HypernymTable = std::map<std::string, std::set<std::string>, std::less<>>;

LemmaTable load_lemmas(const std::filesystem::path& path);
HypernymTable load_hypernyms(const std::filesystem::path& path);
LemmaTable parse_lemmas(std::string_view contents, const std::string& source = "<lemmas>");
HypernymTable parse_hypernyms(std::string_view contents, const std::string& source = "<hypernyms>");

// Share of `side` arguments whose C_a contains the concept; 0 for an empty side.
double stance_frequency(std::string_view concept_label, const AlignedSets& aligned,
                        std::span<const Argument* const> side);

struct ConceptScore {
  std::string concept_label;
  double pro_score = 0.0;  // f+ - f-
  double con_score = 0.0;  // f- - f+
};

// All concepts in the union of the topic's C_a, sorted by label.
std::vector<ConceptScore> score_concepts(std::string_view topic_id, const AlignedSets& aligned,
                                         const Corpus& corpus);

// Keeps the highest-|score| concept per lemma; ties go to the smaller label.
std::vector<ConceptScore> dedup_lemmas(std::vector<ConceptScore> scored, const LemmaTable& lemmas);

struct SignatureEntry {
  std::string concept_label;
  Side side = Side::pro;
  double score = 0.0;
};

struct Signature {
  std::string topic_id;
  int k = 0;
  std::vector<SignatureEntry> candidates;  // selection before any filter
  std::vector<SignatureEntry> concepts;    // current dimensions, in order
  std::vector<std::string> filters_applied;
  std::vector<std::string> warnings;

  std::size_t dimension() const { return concepts.size(); }
  std::vector<std::string> concept_labels() const;
};

// k best pro-side concepts (pro_score > 0) then k best con-side concepts
// (con_score > 0); zero-score concepts fill a short side, pro first.
Signature select_top_k(std::string_view topic_id, const std::vector<ConceptScore>& scored, int k);

// Removes concepts whose lemma is a (transitive) hypernym of another member's lemma.
// A lemma that never occurs in the table is never removed.
Signature filter_hypernyms(Signature sig, const HypernymTable& hypernyms, const LemmaTable& lemmas);

// Drops concepts the model judges irrelevant ("2"); unparseable replies keep the concept.
Signature filter_relevance(Signature sig, const DebateTopic& topic, LlmClient& client,
                           std::size_t threads = 8);

}  // namespace psv
