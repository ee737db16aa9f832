#include "psv/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "psv/util.hpp"

namespace psv {

std::string_view to_string(Orientation o) {
  return o == Orientation::higher_is_positive ? "higher_is_positive" : "lower_is_positive";
}

double roc_auc(std::span<const double> scores, std::span<const int> labels, Orientation orientation) {
  if (scores.size() != labels.size()) throw Error("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<double> s(n);
  std::uint64_t n_pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(scores[i])) throw Error("roc_auc: NaN score");
    if (labels[i] != 0 && labels[i] != 1) throw Error("roc_auc: labels must be 0 or 1");
    s[i] = orientation == Orientation::lower_is_positive ? -scores[i] : scores[i];
    n_pos += static_cast<std::uint64_t>(labels[i]);
  }
  const std::uint64_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("roc_auc: need at least one positive and one negative label");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  // Doubled mid-ranks keep everything in integers: a tie block at 0-based
  // positions [i, j) has 1-based mid-rank (i + 1 + j) / 2.
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && s[order[j]] == s[order[i]]) ++j;
    std::uint64_t pos_in_block = 0;
    for (std::size_t t = i; t < j; ++t) pos_in_block += static_cast<std::uint64_t>(labels[order[t]]);
    rank_sum2 += pos_in_block * (i + 1 + j);
    i = j;
  }
  // 2U = 2R - n_pos(n_pos + 1)
  const std::uint64_t u2 = rank_sum2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / static_cast<double>(2 * n_pos * n_neg);
}

F1Report macro_f1(std::span<const std::string> pred, std::span<const std::string> gold,
                  std::span<const std::string> classes) {
  auto cm = confusion_matrix(pred, gold, classes);
  const std::size_t c = classes.size();
  F1Report out;
  out.per_class.assign(c, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t tp = cm[k][k], gold_k = 0, pred_k = 0;
    for (std::size_t j = 0; j < c; ++j) {
      gold_k += cm[k][j];
      pred_k += cm[j][k];
    }
    if (tp == 0) continue;
    double p = static_cast<double>(tp) / static_cast<double>(pred_k);
    double r = static_cast<double>(tp) / static_cast<double>(gold_k);
    out.per_class[k] = 2.0 * p * r / (p + r);
  }
  double sum = 0.0;
  for (double f : out.per_class) sum += f;
  out.macro = c == 0 ? 0.0 : sum / static_cast<double>(c);
  return out;
}

Prf precision_recall_f1(const std::set<std::string>& pred, const std::set<std::string>& gold) {
  std::size_t hit = 0;
  for (const auto& p : pred) hit += gold.count(p);
  Prf out;
  if (!pred.empty()) out.precision = static_cast<double>(hit) / static_cast<double>(pred.size());
  if (!gold.empty()) out.recall = static_cast<double>(hit) / static_cast<double>(gold.size());
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> pred, std::span<const std::string> gold,
                                 std::span<const std::string> classes) {
  if (pred.size() != gold.size()) throw Error("prediction and gold lists differ in length");
  if (pred.empty()) throw Error("no items to evaluate");
  auto index_of = [&](const std::string& label) {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw Error("label '" + label + "' is not among the declared classes");
    return static_cast<std::size_t>(it - classes.begin());
  };
  ConfusionMatrix cm(classes.size(), std::vector<std::size_t>(classes.size(), 0));
  for (std::size_t i = 0; i < pred.size(); ++i) ++cm[index_of(gold[i])][index_of(pred[i])];
  return cm;
}

ReliabilityData parse_reliability(std::string_view contents, const std::string& source) {
  ReliabilityData data;
  std::map<std::string, std::size_t, std::less<>> item_idx, annot_idx;
  std::map<std::pair<std::size_t, std::size_t>, std::string> cells;
  std::size_t line_no = 0;
  for (const auto& raw : util::split(contents, '\n')) {
    ++line_no;
    auto line = util::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto cols = util::split(line, '\t');
    if (cols.size() != 3) throw ParseError(source, line_no, "expected item<TAB>annotator<TAB>label");
    for (auto& c : cols) c = util::trim(c);
    if (cols[0].empty() || cols[1].empty() || cols[2].empty()) throw ParseError(source, line_no, "empty field");
    auto [it, new_item] = item_idx.try_emplace(cols[0], data.items.size());
    if (new_item) data.items.push_back(cols[0]);
    auto [at, new_annot] = annot_idx.try_emplace(cols[1], data.annotators.size());
    if (new_annot) data.annotators.push_back(cols[1]);
    if (!cells.emplace(std::pair{at->second, it->second}, cols[2]).second) {
      throw ParseError(source, line_no, "duplicate label for item '" + cols[0] + "' by '" + cols[1] + "'");
    }
  }
  data.cells.assign(data.annotators.size(), std::vector<std::optional<std::string>>(data.items.size()));
  for (auto& [key, label] : cells) data.cells[key.first][key.second] = label;
  return data;
}

ReliabilityData load_reliability(const std::filesystem::path& path) {
  return parse_reliability(util::read_file(path), path.string());
}

double krippendorff_alpha_nominal(const ReliabilityData& data) {
  for (const auto& row : data.cells) {
    if (row.size() != data.items.size()) throw Error("reliability matrix rows differ in length");
  }
  std::map<std::string, double> marginals;  // n_c
  double n = 0.0;
  double observed = 0.0;  // sum over c != k of o_ck
  for (std::size_t u = 0; u < data.items.size(); ++u) {
    std::map<std::string, double> counts;
    double m = 0.0;
    for (const auto& row : data.cells) {
      if (row[u]) {
        counts[*row[u]] += 1.0;
        m += 1.0;
      }
    }
    if (m < 2.0) continue;
    double same = 0.0;
    for (auto& [label, c] : counts) {
      same += c * c;
      marginals[label] += c;
    }
    observed += (m * m - same) / (m - 1.0);
    n += m;
  }
  if (n == 0.0) throw Error("no item carries two or more annotations");
  double sq = 0.0;
  for (auto& [label, c] : marginals) sq += c * c;
  double expected = n * n - sq;
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

bool global_label_positive(PairGlobalLabel label, Channel channel) {
  switch (channel) {
    case Channel::agreement:
      return label == PairGlobalLabel::agreement || label == PairGlobalLabel::partial_agreement;
    case Channel::orthogonality: return label == PairGlobalLabel::orthogonal;
    case Channel::disagreement: return label == PairGlobalLabel::disagreement;
  }
  return false;
}

bool concept_label_positive(PairConceptLabel label, Channel channel) {
  switch (channel) {
    case Channel::agreement: return label == PairConceptLabel::agree;
    case Channel::orthogonality: return label == PairConceptLabel::neutral;
    case Channel::disagreement: return label == PairConceptLabel::disagree;
  }
  return false;
}

namespace {

void require_channel(const PairScoreMap& scores, Channel channel) {
  if (scores.empty()) throw Error("no pair scores to evaluate");
  auto family = scores.begin()->second.family;
  if (!has_channel(family, channel)) throw ChannelUndefinedError(family, channel);
}

[[noreturn]] void throw_missing(const std::vector<std::string>& missing) {
  std::string msg = "no scores for " + std::to_string(missing.size()) + " annotated pair(s):";
  for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
  if (missing.size() > 20) msg += " ...";
  throw Error(msg);
}

AucResult finish(const std::vector<double>& values, const std::vector<int>& labels, Orientation o) {
  AucResult r;
  r.n = values.size();
  r.n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  r.orientation = o;
  r.auc = roc_auc(values, labels, o);
  return r;
}

}  // namespace

AucResult eval_global_acceptability(const PairScoreMap& scores, const AnnotationSet& annotations, Channel channel) {
  require_channel(scores, channel);
  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::string> missing;
  for (const auto& [key, label] : annotations.pair_global_labels) {
    if (key.first == key.second) continue;
    auto it = scores.find(key);
    if (it == scores.end()) {
      missing.push_back(key.first + "|" + key.second);
      continue;
    }
    values.push_back(it->second.global_value(channel));
    labels.push_back(global_label_positive(label, channel) ? 1 : 0);
  }
  if (!missing.empty()) throw_missing(missing);
  return finish(values, labels, Orientation::higher_is_positive);
}

AucResult eval_perspectivized(const PairScoreMap& scores, const AnnotationSet& annotations, const Corpus& corpus,
                              const std::map<std::string, std::vector<std::string>>& concepts, Channel channel,
                              std::size_t* skipped) {
  require_channel(scores, channel);
  std::vector<double> values;
  std::vector<int> labels;
  std::set<std::string> missing;
  std::size_t skip = 0;
  for (const auto& [key, label] : annotations.pair_concept_labels) {
    const auto& [pair, concept_label] = key;
    if (pair.first == pair.second) continue;
    auto it = scores.find(pair);
    if (it == scores.end()) {
      missing.insert(pair.first + "|" + pair.second);
      continue;
    }
    const auto& topic_id = corpus.argument(pair.first).topic_id;
    auto ct = concepts.find(topic_id);
    if (ct == concepts.end()) throw Error("no signature for topic '" + topic_id + "'");
    auto pos = std::find(ct->second.begin(), ct->second.end(), concept_label);
    if (pos == ct->second.end()) {
      ++skip;
      continue;
    }
    values.push_back(it->second.concept_values(channel).at(static_cast<std::size_t>(pos - ct->second.begin())));
    labels.push_back(concept_label_positive(label, channel) ? 1 : 0);
  }
  if (!missing.empty()) throw_missing({missing.begin(), missing.end()});
  if (skipped) *skipped = skip;
  return finish(values, labels, Orientation::higher_is_positive);
}

Orientation same_side_orientation(Channel channel) {
  return channel == Channel::disagreement ? Orientation::lower_is_positive : Orientation::higher_is_positive;
}

AucResult eval_same_side(std::span<const ScoredPair> pairs, const Corpus& corpus, Channel channel) {
  std::vector<double> values;
  std::vector<int> labels;
  for (const auto& p : pairs) {
    if (p.arg1_id == p.arg2_id) continue;
    const auto& a = corpus.argument(p.arg1_id);
    const auto& b = corpus.argument(p.arg2_id);
    if (a.topic_id != b.topic_id) continue;
    values.push_back(p.value);
    labels.push_back(a.stance == b.stance ? 1 : 0);
  }
  return finish(values, labels, same_side_orientation(channel));
}

SignatureEval eval_signature(std::span<const Signature> signatures, const AnnotationSet& annotations) {
  SignatureEval out;
  std::set<std::string> relevant, appropriate, pred;
  auto key_of = [](const std::string& topic, const std::string& label) { return topic + '\x1f' + label; };
  for (const auto& sig : signatures) {
    for (const auto& [key, label] : annotations.signature_labels) {
      if (key.first != sig.topic_id) continue;
      ++out.n_labeled;
      if (label.relevant) relevant.insert(key_of(key.first, key.second));
      if (label.appropriate_granularity) appropriate.insert(key_of(key.first, key.second));
    }
    for (const auto& e : sig.concepts) {
      if (annotations.signature_labels.contains({sig.topic_id, e.concept_label})) {
        pred.insert(key_of(sig.topic_id, e.concept_label));
      }
    }
  }
  out.relevance = precision_recall_f1(pred, relevant);
  out.granularity = precision_recall_f1(pred, appropriate);
  return out;
}

StanceEval eval_stance(std::span<const PsvPair> psvs, const std::map<std::string, Signature>& signatures,
                       const Corpus& corpus, const AnnotationSet& annotations, bool appropriate_only) {
  std::vector<std::string> pred, gold;
  for (const auto& psv : psvs) {
    const auto& arg = corpus.argument(psv.discrete.argument_id);
    auto st = signatures.find(arg.topic_id);
    if (st == signatures.end()) throw Error("no signature for topic '" + arg.topic_id + "'");
    const auto& entries = st->second.concepts;
    if (entries.size() != psv.discrete.values.size()) {
      throw Error("PSV of '" + arg.id + "' does not match its topic signature");
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& label = entries[i].concept_label;
      auto g = annotations.stance(arg.id, label);
      if (!g) continue;
      if (appropriate_only) {
        auto sl = annotations.signature_labels.find({arg.topic_id, label});
        if (sl == annotations.signature_labels.end() || !sl->second.appropriate_granularity) continue;
      }
      pred.emplace_back(to_string(psv.discrete.values[i]));
      gold.emplace_back(to_string(*g));
    }
  }
  StanceEval out;
  out.n = pred.size();
  if (out.n == 0) return out;
  out.f1 = macro_f1(pred, gold, kStanceClasses);
  out.confusion = confusion_matrix(pred, gold, kStanceClasses);
  return out;
}

std::string format_acceptability_table(std::span<const MetricRecord> records) {
  struct Row {
    std::string protocol, mode;
    std::map<std::string, double> values;
  };
  std::vector<Row> rows;
  for (const auto& r : records) {
    if (r.metric != "roc_auc") continue;
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const Row& row) { return row.protocol == r.protocol && row.mode == r.family; });
    if (it == rows.end()) {
      rows.push_back({r.protocol, r.family, {}});
      it = rows.end() - 1;
    }
    it->values[r.channel] = r.value;
  }
  std::ostringstream os;
  os << std::left << std::setw(16) << "protocol" << std::setw(10) << "mode" << std::setw(12) << "agreement"
     << std::setw(12) << "orthogonal" << "disagreement\n";
  for (const auto& row : rows) {
    os << std::setw(16) << row.protocol << std::setw(10) << row.mode;
    for (auto c : kAllChannels) {
      std::string cell = "--";
      auto v = row.values.find(std::string(to_string(c)));
      if (v != row.values.end()) {
        std::ostringstream num;
        num << std::fixed << std::setprecision(2) << v->second;
        bool starred = row.protocol == "same_side" && same_side_orientation(c) == Orientation::lower_is_positive;
        cell = (starred ? "*" : "") + num.str();
      }
      if (c == Channel::disagreement) {
        os << cell << '\n';
      } else {
        os << std::setw(12) << cell;
      }
    }
  }
  return os.str();
}

}  // namespace psv
