#pragma once

// Chat-completion client with a content-addressed on-disk cache, bounded
// in-flight requests and exponential-backoff retries, plus the prompt
// templates and reply parsers used by the pipeline.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psv/corpus.hpp"
#include "psv/transport.hpp"
#include "psv/util.hpp"

namespace psv {

enum class PromptName {
  stance_zero,
  stance_few,
  relevance,
  topic_stakeholders,
  argument_stakeholders,
  pairwise_acceptability,
};

std::string_view to_string(PromptName name);
PromptName parse_prompt_name(std::string_view s);

class RenderError : public Error {
 public:
  using Error::Error;
};

// Template text with {placeholder} slots; placeholder names are [a-z0-9_]+.
class PromptTemplate {
 public:
  PromptTemplate(PromptName name, std::string text);

  static const PromptTemplate& builtin(PromptName name);

  PromptName name() const { return name_; }
  const std::string& text() const { return text_; }
  const std::vector<std::string>& placeholders() const { return placeholders_; }

  // Throws RenderError if any placeholder has no fill.
  std::string render(const std::map<std::string, std::string>& fills) const;

 private:
  PromptName name_;
  std::string text_;
  std::vector<std::string> placeholders_;
};

struct CompletionParams {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 0;  // 0: let the service decide
};

// Key = sha256 over (model, rendered prompt, sampling params).
std::string cache_key(const std::string& prompt, const CompletionParams& params);

// One JSON file per entry, named <key>.json, holding the reply next to the prompt.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& prompt, const CompletionParams& params,
           const std::string& reply);
  std::size_t size() const;
  // Removes every entry; returns how many were removed.
  std::size_t purge();
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> replies_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class HttpStatusError : public Error {
 public:
  HttpStatusError(int status, const std::string& body);
  int status() const { return status_; }

 private:
  int status_;
};

// Reply text did not match the expected format; raw() keeps the reply.
class ReplyParseError : public Error {
 public:
  ReplyParseError(const std::string& what, std::string raw);
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

struct LlmConfig {
  std::string chat_path = "/chat/completions";
  std::string api_key;
  std::string default_model = "gpt-4o-2024-11-20";
  std::map<PromptName, std::string> models;  // per-prompt overrides
  double temperature = 0.0;
  int max_retries = 4;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_max{30000};
  int max_in_flight = 8;
};

class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // `cache` may be null (no caching). Neither pointer is owned.
  LlmClient(LlmConfig config, Transport* transport, ResponseCache* cache);

  std::string complete(const PromptTemplate& tmpl, const std::map<std::string, std::string>& fills);
  std::string complete(const PromptTemplate& tmpl, const std::map<std::string, std::string>& fills,
                       const CompletionParams& params);
  std::string complete_rendered(const std::string& prompt, const CompletionParams& params);

  CompletionParams params_for(PromptName name) const;
  const LlmConfig& config() const { return config_; }

  void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }
  std::size_t network_calls() const { return network_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  std::string request(const std::string& prompt, const CompletionParams& params);

  LlmConfig config_;
  Transport* transport_;
  ResponseCache* cache_;
  Sleeper sleeper_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> network_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

// --- reply parsers -------------------------------------------------------

// First digit decides: '1' relevant, '2' irrelevant; anything else is nullopt.
std::optional<bool> parse_relevance_reply(std::string_view reply);
// One word among negative|neutral|positive (case-insensitive, punctuation trimmed).
StanceValue parse_stance_reply(std::string_view reply);
// Line- or comma-delimited list; bullets/numbering/quotes stripped; case-insensitive dedup.
std::vector<std::string> parse_list_reply(std::string_view reply);
// Names from `reply` that fuzzily match a candidate, returned as the candidate spelling
// in candidate order. Unmatched names are reported through `dropped` when given.
std::vector<std::string> match_candidates(const std::vector<std::string>& names,
                                          const std::vector<std::string>& candidates,
                                          std::vector<std::string>* dropped = nullptr);
// Integer list such as "[1, 3, 2]"; each entry in {1,2,3}; exactly `expected` entries.
std::vector<int> parse_pairwise_reply(std::string_view reply, std::size_t expected);

// Python-style list literal of strings, e.g. ['a', "b's"].
std::string python_list_literal(const std::vector<std::string>& items);

// --- prompt-level operations ---------------------------------------------

enum class StanceMode { zero_shot, few_shot };

std::optional<bool> llm_relevance(LlmClient& client, const DebateTopic& topic, const std::string& concept_label);
StanceValue llm_stance(LlmClient& client, const DebateTopic& topic, const Argument& argument,
                       const std::string& concept_label, StanceMode mode);
std::vector<std::string> topic_stakeholders(const DebateTopic& topic, LlmClient& client);
std::vector<std::string> argument_stakeholders(const Argument& argument,
                                               const std::vector<std::string>& candidate_groups,
                                               LlmClient& client);
std::vector<int> pairwise_acceptability(const Argument& arg1, const Argument& arg2,
                                        const std::vector<std::string>& concepts, LlmClient& client);

}  // namespace psv
