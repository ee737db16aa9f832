#pragma once

// Perspectivized stance vectors: one stance per signature concept, in
// discrete form and as n x 3 probability rows (against, neutral, favor).

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "psv/corpus.hpp"
#include "psv/llm.hpp"
#include "psv/signature.hpp"

namespace psv {

// Column order is fixed: against, neutral, favor.
using ProbRow = std::array<double, 3>;
inline constexpr std::size_t kAgainst = 0;
inline constexpr std::size_t kNeutral = 1;
inline constexpr std::size_t kFavor = 2;

struct PsvDiscrete {
  std::string argument_id;
  std::string signature_ref;  // topic id of the signature
  std::vector<StanceValue> values;
};

struct PsvProb {
  std::string argument_id;
  std::string signature_ref;
  std::vector<ProbRow> rows;
};

ProbRow one_hot(StanceValue v);
StanceValue argmax(const ProbRow& row);  // ties resolve toward neutral, then favor
PsvProb to_prob(const PsvDiscrete& psv);
// Row entries finite, in [0,1], summing to 1 within `tol`.
void validate_row(const ProbRow& row, double tol = 1e-9);

StanceValue baseline_stance(const std::string& concept_label, const std::set<std::string>& aligned_concepts,
                            Side topic_stance);

enum class PredictorKind { baseline, llm_zero, llm_few };
PredictorKind parse_predictor(std::string_view s);
std::string_view to_string(PredictorKind k);

class StancePredictor {
 public:
  virtual ~StancePredictor() = default;
  virtual StanceValue predict(const Argument& argument, const std::string& concept_label) = 0;
  // Predictors that emit distributions override this; the default is one_hot(predict()).
  virtual ProbRow predict_distribution(const Argument& argument, const std::string& concept_label) {
    return one_hot(predict(argument, concept_label));
  }
  virtual bool emits_distributions() const { return false; }
};

class BaselinePredictor : public StancePredictor {
 public:
  explicit BaselinePredictor(const AlignedSets& aligned) : aligned_(aligned) {}
  StanceValue predict(const Argument& argument, const std::string& concept_label) override;

 private:
  const AlignedSets& aligned_;
};

// With fallback_neutral, unparseable replies become neutral with a warning;
// otherwise the ReplyParseError propagates.
class LlmPredictor : public StancePredictor {
 public:
  LlmPredictor(LlmClient& client, const Corpus& corpus, StanceMode mode, bool fallback_neutral = true)
      : client_(client), corpus_(corpus), mode_(mode), fallback_neutral_(fallback_neutral) {}
  StanceValue predict(const Argument& argument, const std::string& concept_label) override;

 private:
  LlmClient& client_;
  const Corpus& corpus_;
  StanceMode mode_;
  bool fallback_neutral_;
};

struct PsvPair {
  PsvDiscrete discrete;
  PsvProb prob;
};

// Predictions fan out over `threads` workers; output order follows the signature.
PsvPair build_psv(const Argument& argument, const Signature& signature, StancePredictor& predictor,
                  std::size_t threads = 1);

}  // namespace psv
