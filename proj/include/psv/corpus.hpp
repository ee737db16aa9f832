#pragma once

// Debate corpus, stance split and annotation loading.
//
// corpus.jsonl holds one JSON object per line. A record with a "question"
// field is a topic {id, question[, stance_labels]}; a record with a
// "topic_id" field is an argument {id, topic_id, text, stance, [stakeholders]}
// where stance is "pro" or "con".
//
// annotations.jsonl holds typed records distinguished by "kind":
//   signature     {topic_id, concept, relevant, appropriate_granularity}
//   stance        {argument_id, concept, value}  value: against|neutral|favor or -1|0|1
//   pair_global   {arg1, arg2, label}              label: agreement|partial_agreement|orthogonal|disagreement
//   pair_concept  {arg1, arg2, concept, label}   label: agree|neutral|disagree

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace psv {

// Overall position of an argument on the binary topic question.
enum class Side : int { con = -1, pro = 1 };

inline int sign(Side s) { return static_cast<int>(s); }
Side parse_side(std::string_view token);  // "pro" | "con"
std::string_view to_string(Side s);

// Perspectivized stance of an argument toward one concept.
enum class StanceValue : int { against = -1, neutral = 0, favor = 1 };

inline int sign(StanceValue v) { return static_cast<int>(v); }
StanceValue stance_from_int(int v);
std::string_view to_string(StanceValue v);

struct DebateTopic {
  std::string id;
  std::string question;
  std::pair<std::string, std::string> stance_labels{"pro", "con"};
};

struct Argument {
  std::string id;
  std::string topic_id;
  std::string text;
  Side stance = Side::pro;
  std::optional<std::vector<std::string>> stakeholders;
};

class Corpus {
 public:
  void add_topic(DebateTopic topic);
  void add_argument(Argument arg);

  const std::vector<DebateTopic>& topics() const { return topics_; }
  const std::vector<Argument>& arguments() const { return arguments_; }

  const DebateTopic* find_topic(std::string_view id) const;
  const Argument* find_argument(std::string_view id) const;
  const DebateTopic& topic(std::string_view id) const;        // throws on unknown id
  const Argument& argument(std::string_view id) const;        // throws on unknown id

  // Arguments of a topic in corpus order.
  std::vector<const Argument*> arguments_of(std::string_view topic_id) const;

  void set_stakeholders(std::string_view argument_id, std::vector<std::string> groups);

  // Serializes in original record order.
  std::string to_jsonl() const;

 private:
  struct Record {
    bool is_topic;
    std::size_t index;
  };
  std::vector<DebateTopic> topics_;
  std::vector<Argument> arguments_;
  std::vector<Record> order_;
  std::unordered_map<std::string, std::size_t> topic_index_;
  std::unordered_map<std::string, std::size_t> argument_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_topic_;
};

Corpus parse_corpus(std::string_view contents, const std::string& source = "<corpus>");
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct StanceSplit {
  std::vector<const Argument*> pro;
  std::vector<const Argument*> con;
};

StanceSplit split_by_stance(std::string_view topic_id, const Corpus& corpus);

enum class PairGlobalLabel { agreement, partial_agreement, orthogonal, disagreement };
enum class PairConceptLabel { agree, neutral, disagree };

PairGlobalLabel parse_pair_global_label(std::string_view token);
PairConceptLabel parse_pair_concept_label(std::string_view token);
std::string_view to_string(PairGlobalLabel l);
std::string_view to_string(PairConceptLabel l);

struct SignatureLabel {
  bool relevant = false;
  bool appropriate_granularity = false;
};

// Unordered argument pair; constructed so that first <= second.
struct PairKey {
  std::string first;
  std::string second;
  PairKey(std::string a, std::string b);
  auto operator<=>(const PairKey&) const = default;
};

class AnnotationSet {
 public:
  // (topic_id, concept) -> labels
  std::map<std::pair<std::string, std::string>, SignatureLabel> signature_labels;
  // (argument_id, concept) -> stance
  std::map<std::pair<std::string, std::string>, StanceValue> stance_labels;
  std::map<PairKey, PairGlobalLabel> pair_global_labels;
  std::map<std::pair<PairKey, std::string>, PairConceptLabel> pair_concept_labels;

  std::optional<PairGlobalLabel> pair_global(std::string_view a, std::string_view b) const;
  std::optional<PairConceptLabel> pair_concept(std::string_view a, std::string_view b,
                                               std::string_view concept_name) const;
  std::optional<StanceValue> stance(std::string_view argument_id, std::string_view concept_name) const;
};

AnnotationSet parse_annotations(std::string_view contents, const Corpus& corpus,
                                const std::string& source = "<annotations>");
AnnotationSet load_annotations(const std::filesystem::path& path, const Corpus& corpus);

}  // namespace psv
