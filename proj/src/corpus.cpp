#include "psv/corpus.hpp"

#include <json.hpp>

#include "psv/util.hpp"

namespace psv {

using nlohmann::json;

Side parse_side(std::string_view token) {
  if (token == "pro") return Side::pro;
  if (token == "con") return Side::con;
  throw Error("unknown stance token '" + std::string(token) + "' (expected pro|con)");
}

std::string_view to_string(Side s) { return s == Side::pro ? "pro" : "con"; }

StanceValue stance_from_int(int v) {
  switch (v) {
    case -1: return StanceValue::against;
    case 0: return StanceValue::neutral;
    case 1: return StanceValue::favor;
  }
  throw Error("stance value out of range: " + std::to_string(v));
}

std::string_view to_string(StanceValue v) {
  switch (v) {
    case StanceValue::against: return "against";
    case StanceValue::neutral: return "neutral";
    case StanceValue::favor: return "favor";
  }
  return "?";
}

void Corpus::add_topic(DebateTopic topic) {
  if (topic.id.empty()) throw Error("topic id is empty");
  if (util::trim(topic.question).empty()) throw Error("topic '" + topic.id + "' has an empty question");
  if (topic_index_.contains(topic.id)) throw Error("duplicate topic id '" + topic.id + "'");
  topic_index_.emplace(topic.id, topics_.size());
  order_.push_back({true, topics_.size()});
  topics_.push_back(std::move(topic));
}

void Corpus::add_argument(Argument arg) {
  if (arg.id.empty()) throw Error("argument id is empty");
  if (util::trim(arg.text).empty()) throw Error("argument '" + arg.id + "' has empty text");
  if (argument_index_.contains(arg.id)) throw Error("duplicate argument id '" + arg.id + "'");
  argument_index_.emplace(arg.id, arguments_.size());
  by_topic_[arg.topic_id].push_back(arguments_.size());
  order_.push_back({false, arguments_.size()});
  arguments_.push_back(std::move(arg));
}

const DebateTopic* Corpus::find_topic(std::string_view id) const {
  auto it = topic_index_.find(std::string(id));
  return it == topic_index_.end() ? nullptr : &topics_[it->second];
}

const Argument* Corpus::find_argument(std::string_view id) const {
  auto it = argument_index_.find(std::string(id));
  return it == argument_index_.end() ? nullptr : &arguments_[it->second];
}

const DebateTopic& Corpus::topic(std::string_view id) const {
  if (const auto* t = find_topic(id)) return *t;
  throw Error("unknown topic '" + std::string(id) + "'");
}

const Argument& Corpus::argument(std::string_view id) const {
  if (const auto* a = find_argument(id)) return *a;
  throw Error("unknown argument '" + std::string(id) + "'");
}

std::vector<const Argument*> Corpus::arguments_of(std::string_view topic_id) const {
  std::vector<const Argument*> out;
  auto it = by_topic_.find(std::string(topic_id));
  if (it == by_topic_.end()) return out;
  out.reserve(it->second.size());
  for (auto idx : it->second) out.push_back(&arguments_[idx]);
  return out;
}

void Corpus::set_stakeholders(std::string_view argument_id, std::vector<std::string> groups) {
  auto it = argument_index_.find(std::string(argument_id));
  if (it == argument_index_.end()) throw Error("unknown argument '" + std::string(argument_id) + "'");
  arguments_[it->second].stakeholders = std::move(groups);
}

std::string Corpus::to_jsonl() const {
  std::string out;
  for (const auto& rec : order_) {
    json j;
    if (rec.is_topic) {
      const auto& t = topics_[rec.index];
      j["id"] = t.id;
      j["question"] = t.question;
      if (t.stance_labels != std::pair<std::string, std::string>{"pro", "con"}) {
        j["stance_labels"] = {t.stance_labels.first, t.stance_labels.second};
      }
    } else {
      const auto& a = arguments_[rec.index];
      j["id"] = a.id;
      j["topic_id"] = a.topic_id;
      j["text"] = a.text;
      j["stance"] = to_string(a.stance);
      if (a.stakeholders) j["stakeholders"] = *a.stakeholders;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::string required_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw Error(std::string("missing or non-string field '") + field + "'");
  }
  return it->get<std::string>();
}

// Calls fn(json, line_no) for each non-blank line; wraps errors with the line number.
template <typename Fn>
void for_each_json_line(std::string_view contents, const std::string& source, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= contents.size()) {
    auto end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    ++line_no;
    auto line = util::trim(contents.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (end == contents.size()) break;
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(source, line_no, "record is not a JSON object");
    try {
      fn(j, line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (end == contents.size()) break;
  }
}

}  // namespace

Corpus parse_corpus(std::string_view contents, const std::string& source) {
  Corpus corpus;
  std::vector<std::pair<std::string, std::size_t>> arg_topics;
  for_each_json_line(contents, source, [&](const json& j, std::size_t line_no) {
    if (j.contains("question")) {
      DebateTopic t;
      t.id = required_string(j, "id");
      t.question = required_string(j, "question");
      if (auto it = j.find("stance_labels"); it != j.end()) {
        if (!it->is_array() || it->size() != 2) throw Error("stance_labels must be a pair of strings");
        t.stance_labels = {(*it)[0].get<std::string>(), (*it)[1].get<std::string>()};
      }
      corpus.add_topic(std::move(t));
    } else if (j.contains("topic_id")) {
      Argument a;
      a.id = required_string(j, "id");
      a.topic_id = required_string(j, "topic_id");
      a.text = required_string(j, "text");
      a.stance = parse_side(required_string(j, "stance"));
      if (auto it = j.find("stakeholders"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw Error("stakeholders must be a list of strings");
        a.stakeholders = it->get<std::vector<std::string>>();
      }
      arg_topics.emplace_back(a.topic_id, line_no);
      corpus.add_argument(std::move(a));
    } else {
      throw Error("record is neither a topic (no 'question') nor an argument (no 'topic_id')");
    }
  });
  for (const auto& [topic_id, line_no] : arg_topics) {
    if (!corpus.find_topic(topic_id)) {
      throw ParseError(source, line_no, "argument references unknown topic '" + topic_id + "'");
    }
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  return parse_corpus(util::read_file(path), path.string());
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  util::write_file_atomic(path, corpus.to_jsonl());
}

StanceSplit split_by_stance(std::string_view topic_id, const Corpus& corpus) {
  corpus.topic(topic_id);
  StanceSplit split;
  for (const auto* a : corpus.arguments_of(topic_id)) {
    (a->stance == Side::pro ? split.pro : split.con).push_back(a);
  }
  return split;
}

PairGlobalLabel parse_pair_global_label(std::string_view token) {
  if (token == "agreement") return PairGlobalLabel::agreement;
  if (token == "partial_agreement") return PairGlobalLabel::partial_agreement;
  if (token == "orthogonal") return PairGlobalLabel::orthogonal;
  if (token == "disagreement") return PairGlobalLabel::disagreement;
  throw Error("unknown pair label '" + std::string(token) + "'");
}

PairConceptLabel parse_pair_concept_label(std::string_view token) {
  if (token == "agree") return PairConceptLabel::agree;
  if (token == "neutral") return PairConceptLabel::neutral;
  if (token == "disagree") return PairConceptLabel::disagree;
  throw Error("unknown pair concept label '" + std::string(token) + "'");
}

std::string_view to_string(PairGlobalLabel l) {
  switch (l) {
    case PairGlobalLabel::agreement: return "agreement";
    case PairGlobalLabel::partial_agreement: return "partial_agreement";
    case PairGlobalLabel::orthogonal: return "orthogonal";
    case PairGlobalLabel::disagreement: return "disagreement";
  }
  return "?";
}

std::string_view to_string(PairConceptLabel l) {
  switch (l) {
    case PairConceptLabel::agree: return "agree";
    case PairConceptLabel::neutral: return "neutral";
    case PairConceptLabel::disagree: return "disagree";
  }
  return "?";
}

PairKey::PairKey(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  first = std::move(a);
  second = std::move(b);
}

std::optional<PairGlobalLabel> AnnotationSet::pair_global(std::string_view a, std::string_view b) const {
  auto it = pair_global_labels.find(PairKey(std::string(a), std::string(b)));
  if (it == pair_global_labels.end()) return std::nullopt;
  return it->second;
}

std::optional<PairConceptLabel> AnnotationSet::pair_concept(std::string_view a, std::string_view b,
                                                            std::string_view concept_name) const {
  auto it = pair_concept_labels.find({PairKey(std::string(a), std::string(b)), std::string(concept_name)});
  if (it == pair_concept_labels.end()) return std::nullopt;
  return it->second;
}

std::optional<StanceValue> AnnotationSet::stance(std::string_view argument_id,
                                                 std::string_view concept_name) const {
  auto it = stance_labels.find({std::string(argument_id), std::string(concept_name)});
  if (it == stance_labels.end()) return std::nullopt;
  return it->second;
}

namespace {

StanceValue parse_stance_label(const json& v) {
  if (v.is_number_integer()) return stance_from_int(v.get<int>());
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "against") return StanceValue::against;
    if (s == "neutral") return StanceValue::neutral;
    if (s == "favor") return StanceValue::favor;
    throw Error("unknown stance label '" + s + "'");
  }
  throw Error("stance label must be a string or integer");
}

bool required_bool(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_boolean()) throw Error(std::string("missing or non-boolean field '") + field + "'");
  return it->get<bool>();
}

}  // namespace

AnnotationSet parse_annotations(std::string_view contents, const Corpus& corpus, const std::string& source) {
  AnnotationSet set;
  std::vector<std::string> missing;
  auto check_arg = [&](const std::string& id, std::size_t line_no) {
    if (!corpus.find_argument(id)) missing.push_back(id + " (line " + std::to_string(line_no) + ")");
  };
  for_each_json_line(contents, source, [&](const json& j, std::size_t line_no) {
    auto kind = required_string(j, "kind");
    bool inserted = true;
    if (kind == "signature") {
      auto topic_id = required_string(j, "topic_id");
      if (!corpus.find_topic(topic_id)) throw Error("unknown topic '" + topic_id + "'");
      SignatureLabel lbl{required_bool(j, "relevant"), required_bool(j, "appropriate_granularity")};
      inserted = set.signature_labels.emplace(std::pair{topic_id, required_string(j, "concept")}, lbl).second;
    } else if (kind == "stance") {
      auto arg = required_string(j, "argument_id");
      check_arg(arg, line_no);
      if (!j.contains("value")) throw Error("missing field 'value'");
      inserted = set.stance_labels
                     .emplace(std::pair{arg, required_string(j, "concept")}, parse_stance_label(j["value"]))
                     .second;
    } else if (kind == "pair_global") {
      auto a = required_string(j, "arg1");
      auto b = required_string(j, "arg2");
      check_arg(a, line_no);
      check_arg(b, line_no);
      inserted = set.pair_global_labels
                     .emplace(PairKey(a, b), parse_pair_global_label(required_string(j, "label")))
                     .second;
    } else if (kind == "pair_concept") {
      auto a = required_string(j, "arg1");
      auto b = required_string(j, "arg2");
      check_arg(a, line_no);
      check_arg(b, line_no);
      inserted = set.pair_concept_labels
                     .emplace(std::pair{PairKey(a, b), required_string(j, "concept")},
                              parse_pair_concept_label(required_string(j, "label")))
                     .second;
    } else {
      throw Error("unknown annotation kind '" + kind + "'");
    }
    if (!inserted) throw Error("duplicate " + kind + " annotation");
  });
  if (!missing.empty()) {
    std::string msg = "annotations reference unknown arguments:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }
  return set;
}

AnnotationSet load_annotations(const std::filesystem::path& path, const Corpus& corpus) {
  return parse_annotations(util::read_file(path), corpus, path.string());
}

}  // namespace psv
