#pragma once

// Evaluation metrics and the three acceptability protocols.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psv/aggregate.hpp"
#include "psv/corpus.hpp"
#include "psv/signature.hpp"
#include "psv/stance.hpp"

namespace psv {

enum class Orientation { higher_is_positive, lower_is_positive };
std::string_view to_string(Orientation o);

// Mann-Whitney U / (n_pos * n_neg), ties counted as 1/2. Labels are 0/1.
// Throws when only one class is present or lengths differ.
double roc_auc(std::span<const double> scores, std::span<const int> labels,
               Orientation orientation = Orientation::higher_is_positive);

struct F1Report {
  double macro = 0.0;
  std::vector<double> per_class;  // same order as `classes`
};

// A class absent from both pred and gold has F1 = 0.
F1Report macro_f1(std::span<const std::string> pred, std::span<const std::string> gold,
                  std::span<const std::string> classes);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Prf precision_recall_f1(const std::set<std::string>& pred, const std::set<std::string>& gold);

// counts[g][p]: items with gold class g predicted as p.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;
ConfusionMatrix confusion_matrix(std::span<const std::string> pred, std::span<const std::string> gold,
                                 std::span<const std::string> classes);

// cells[annotator][item]; nullopt marks a missing annotation.
struct ReliabilityData {
  std::vector<std::string> annotators;
  std::vector<std::string> items;
  std::vector<std::vector<std::optional<std::string>>> cells;
};

// TSV rows: item, annotator, label.
ReliabilityData parse_reliability(std::string_view contents, const std::string& source = "<reliability>");
ReliabilityData load_reliability(const std::filesystem::path& path);

// Coincidence-matrix form; items with fewer than two labels are skipped.
// When every pairable value is identical the expected disagreement is 0 and
// the result is 1.
double krippendorff_alpha_nominal(const ReliabilityData& data);

struct AucResult {
  double auc = 0.0;
  std::size_t n = 0;
  std::size_t n_pos = 0;
  Orientation orientation = Orientation::higher_is_positive;
};

using PairScoreMap = std::map<PairKey, PairScores>;

// Binary target per channel: agreement <- {agreement, partial_agreement},
// orthogonality <- orthogonal, disagreement <- disagreement.
bool global_label_positive(PairGlobalLabel label, Channel channel);
bool concept_label_positive(PairConceptLabel label, Channel channel);

// Every annotated pair must have scores; missing pairs are listed in the error.
AucResult eval_global_acceptability(const PairScoreMap& scores, const AnnotationSet& annotations, Channel channel);

// Per-concept scores against agree/neutral/disagree labels. `concepts` maps a
// topic id to its signature labels in PSV order. Annotated concepts outside
// the signature are skipped and counted in `skipped`.
AucResult eval_perspectivized(const PairScoreMap& scores, const AnnotationSet& annotations, const Corpus& corpus,
                              const std::map<std::string, std::vector<std::string>>& concepts, Channel channel,
                              std::size_t* skipped = nullptr);

struct ScoredPair {
  std::string arg1_id;
  std::string arg2_id;
  double value = 0.0;
};

// Disagreement is lower-is-positive; agreement and orthogonality higher-is-positive.
Orientation same_side_orientation(Channel channel);

// Positive class: both arguments share their topic stance. Self-pairs are ignored.
AucResult eval_same_side(std::span<const ScoredPair> pairs, const Corpus& corpus, Channel channel);

struct SignatureEval {
  Prf relevance;
  Prf granularity;
  std::size_t n_labeled = 0;
};

// Pooled over topics. Only concepts carrying a label take part: pred = labeled
// signature concepts, gold = labeled concepts marked relevant / appropriate.
SignatureEval eval_signature(std::span<const Signature> signatures, const AnnotationSet& annotations);

struct StanceEval {
  F1Report f1;
  ConfusionMatrix confusion;
  std::size_t n = 0;
};

inline const std::vector<std::string> kStanceClasses = {"against", "neutral", "favor"};

// Macro-F1 of PSV stances against stance labels; with `appropriate_only`,
// restricted to concepts annotated as appropriate granularity.
StanceEval eval_stance(std::span<const PsvPair> psvs, const std::map<std::string, Signature>& signatures,
                       const Corpus& corpus, const AnnotationSet& annotations, bool appropriate_only);

struct MetricRecord {
  std::string protocol;  // global | perspectivized | same_side | signature | stance
  std::string family;    // aggregation family, predictor or filter setting
  std::string channel;
  std::string metric;
  double value = 0.0;
  std::size_t n = 0;
};

// Mode x channel grid for the three acceptability protocols; "--" for
// undefined channels and a leading '*' for lower-is-positive entries.
std::string format_acceptability_table(std::span<const MetricRecord> records);

}  // namespace psv
