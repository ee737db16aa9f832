// Built-in prompt templates.

#include "psv/llm.hpp"

namespace psv {

namespace {

constexpr std::string_view kStanceInstruction =
    "Given a controversial topic discussed by a given argument, and an aspect, provide an one-word answer "
    "to the following question: Considering a person writing this argument, what is their attitude towards "
    "the given aspect: negative, neutral, or positive?";

constexpr std::string_view kStanceQuery =
    "Topic: {topic}\n"
    "Argument: {argument}\n"
    "Aspect: {aspect}";

// Stand-in exemplars: the original two hand-crafted samples are unpublished.
// Both show an aspect stance that differs from the argument's overall position.
constexpr std::string_view kStanceExamples =
    "Topic: Should animal hunting be banned?\n"
    "Argument: Hunting should not be banned. Regulated hunting keeps deer populations in check and pays for "
    "conservation work. Killing endangered animals for trophies, however, is cruel and must stay illegal.\n"
    "Aspect: trophy hunting\n"
    "Answer: negative\n"
    "\n"
    "Topic: Do you support the death penalty?\n"
    "Argument: I do not support the death penalty. Life imprisonment already protects society from dangerous "
    "criminals, and it leaves room to correct wrongful convictions.\n"
    "Aspect: protecting society\n"
    "Answer: positive";

constexpr std::string_view kRelevance =
    "We plan to compare arguments depending on which concepts they evoke. Therefore, we created a catalog of "
    "concepts for each issue. For the following concept, decide whether it is relevant for the given issue:\n"
    "1: yes\n"
    "2: no\n"
    "Example Annotation for issue 'gun control':\n"
    "arm themselves:     1\n"
    "control:            1\n"
    "criminals:          1\n"
    "dangerous:          1\n"
    "laws regulate who:  1\n"
    "own guns:           1\n"
    "police:             1\n"
    "politics:           1\n"
    "shooting guns:      1\n"
    "wrong:              1\n"
    "\n"
    "Issue: {topic}\n"
    "Concept: {concept}";

constexpr std::string_view kTopicStakeholders =
    "A stakeholder is a group of people who are affected by a topic. For example, the topic \"Should young "
    "children have access to the internet?\" has the stakeholders \"Children\" and \"Parents\". Return a list "
    "of the most important stakeholders for the topic \"{topic}\". Return a simple list without explanations. "
    "Limit yourself to the few most important ones.";

constexpr std::string_view kArgumentStakeholders =
    "Here is an argument from someone: '{argument}'. Which of these stakeholders are most likely to utter "
    "this argument: {stakeholders}? Return a list of stakeholders without additional information. Multiple "
    "may apply.";

constexpr std::string_view kPairwise =
    "Arguments of opposite stance can have agreements – even though they don't agree on the issue at a "
    "binary level. Similarly, arguments with the same stance can disagree. We are interested in identifying "
    "and specifying such (dis-)agreements. We will present you with two independently written arguments of "
    "opposite stance and a list of concepts.\n"
    "\n"
    "For each concept, annotate whether it is part of the agreement or disagreement:\n"
    "    1: agreement, i.e., the authors could likely find agreement regarding this concept.\n"
    "    2: neutral\n"
    "    3: disagreement, i.e., it is not likely that the authors could agree regarding this concept.\n"
    "\n"
    "Argument 1: {argument_1}\n"
    "\n"
    "\n"
    "Argument 2: {argument_2}\n"
    "\n"
    "\n"
    "Concepts: {concepts}\n"
    "\n"
    "\n"
    "Return your output as a list of integers, where each integer corresponds to the concept at the same "
    "index in the list of concepts. Do not include any additional information in your output.";

std::string join(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) out += p;
  return out;
}

}  // namespace

const PromptTemplate& PromptTemplate::builtin(PromptName name) {
  static const PromptTemplate stance_zero(PromptName::stance_zero,
                                          join({kStanceInstruction, "\n\n", kStanceQuery}));
  static const PromptTemplate stance_few(
      PromptName::stance_few,
      join({kStanceInstruction, "\n\n", kStanceExamples, "\n\n", kStanceQuery, "\nAnswer:"}));
  static const PromptTemplate relevance(PromptName::relevance, std::string(kRelevance));
  static const PromptTemplate topic_sh(PromptName::topic_stakeholders, std::string(kTopicStakeholders));
  static const PromptTemplate arg_sh(PromptName::argument_stakeholders, std::string(kArgumentStakeholders));
  static const PromptTemplate pairwise(PromptName::pairwise_acceptability, std::string(kPairwise));
  switch (name) {
    case PromptName::stance_zero: return stance_zero;
    case PromptName::stance_few: return stance_few;
    case PromptName::relevance: return relevance;
    case PromptName::topic_stakeholders: return topic_sh;
    case PromptName::argument_stakeholders: return arg_sh;
    case PromptName::pairwise_acceptability: return pairwise;
  }
  throw Error("unknown prompt");
}

}  // namespace psv
