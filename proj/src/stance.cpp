#include "psv/stance.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "psv/util.hpp"

namespace psv {

ProbRow one_hot(StanceValue v) {
  switch (v) {
    case StanceValue::against: return {1.0, 0.0, 0.0};
    case StanceValue::neutral: return {0.0, 1.0, 0.0};
    case StanceValue::favor: return {0.0, 0.0, 1.0};
  }
  throw Error("invalid stance value");
}

StanceValue argmax(const ProbRow& row) {
  if (row[kNeutral] >= row[kAgainst] && row[kNeutral] >= row[kFavor]) return StanceValue::neutral;
  return row[kFavor] >= row[kAgainst] ? StanceValue::favor : StanceValue::against;
}

PsvProb to_prob(const PsvDiscrete& psv) {
  PsvProb out{psv.argument_id, psv.signature_ref, {}};
  out.rows.reserve(psv.values.size());
  for (auto v : psv.values) out.rows.push_back(one_hot(v));
  return out;
}

void validate_row(const ProbRow& row, double tol) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw Error("probability entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) throw Error("probability row sums to " + util::format_double(sum) + ", not 1");
}

StanceValue baseline_stance(const std::string& concept_label, const std::set<std::string>& aligned_concepts,
                            Side topic_stance) {
  if (!aligned_concepts.contains(concept_label)) return StanceValue::neutral;
  return topic_stance == Side::pro ? StanceValue::favor : StanceValue::against;
}

PredictorKind parse_predictor(std::string_view s) {
  if (s == "baseline") return PredictorKind::baseline;
  if (s == "llm_zero") return PredictorKind::llm_zero;
  if (s == "llm_few") return PredictorKind::llm_few;
  throw Error("unknown predictor '" + std::string(s) + "' (baseline|llm_zero|llm_few)");
}

std::string_view to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::baseline: return "baseline";
    case PredictorKind::llm_zero: return "llm_zero";
    case PredictorKind::llm_few: return "llm_few";
  }
  return "?";
}

StanceValue BaselinePredictor::predict(const Argument& argument, const std::string& concept_label) {
  auto it = aligned_.find(argument.id);
  if (it == aligned_.end()) throw Error("no aligned concepts for argument '" + argument.id + "'");
  return baseline_stance(concept_label, it->second, argument.stance);
}

StanceValue LlmPredictor::predict(const Argument& argument, const std::string& concept_label) {
  const auto& topic = corpus_.topic(argument.topic_id);
  try {
    return llm_stance(client_, topic, argument, concept_label, mode_);
  } catch (const ReplyParseError& e) {
    if (!fallback_neutral_) throw;
    spdlog::warn("argument {} / concept '{}': {}; using neutral", argument.id, concept_label, e.what());
    return StanceValue::neutral;
  }
}

PsvPair build_psv(const Argument& argument, const Signature& signature, StancePredictor& predictor,
                  std::size_t threads) {
  auto n = signature.concepts.size();
  PsvPair out;
  out.discrete = {argument.id, signature.topic_id, std::vector<StanceValue>(n, StanceValue::neutral)};
  out.prob = {argument.id, signature.topic_id, std::vector<ProbRow>(n)};
  util::parallel_for(n, threads, [&](std::size_t i) {
    const auto& label = signature.concepts[i].concept_label;
    try {
      if (predictor.emits_distributions()) {
        auto row = predictor.predict_distribution(argument, label);
        validate_row(row);
        out.prob.rows[i] = row;
        out.discrete.values[i] = argmax(row);
      } else {
        auto v = predictor.predict(argument, label);
        out.discrete.values[i] = v;
        out.prob.rows[i] = one_hot(v);
      }
    } catch (const std::exception& e) {
      throw Error("stance prediction failed for argument '" + argument.id + "', concept '" + label + "': " +
                  e.what());
    }
  });
  return out;
}

}  // namespace psv
