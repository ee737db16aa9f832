#include "psv/llm.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <ctime>
#include <json.hpp>
#include <thread>

namespace psv {

using nlohmann::json;

std::string_view to_string(PromptName name) {
  switch (name) {
    case PromptName::stance_zero: return "stance_zero";
    case PromptName::stance_few: return "stance_few";
    case PromptName::relevance: return "relevance";
    case PromptName::topic_stakeholders: return "topic_stakeholders";
    case PromptName::argument_stakeholders: return "argument_stakeholders";
    case PromptName::pairwise_acceptability: return "pairwise_acceptability";
  }
  return "?";
}

PromptName parse_prompt_name(std::string_view s) {
  for (auto n : {PromptName::stance_zero, PromptName::stance_few, PromptName::relevance,
                 PromptName::topic_stakeholders, PromptName::argument_stakeholders,
                 PromptName::pairwise_acceptability}) {
    if (to_string(n) == s) return n;
  }
  throw Error("unknown prompt name '" + std::string(s) + "'");
}

namespace {

bool is_placeholder_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Visits the text as alternating literal chunks and placeholder names.
template <typename Literal, typename Slot>
void scan_template(std::string_view text, Literal&& on_literal, Slot&& on_slot) {
  std::size_t i = 0;
  while (i < text.size()) {
    auto open = text.find('{', i);
    if (open == std::string_view::npos) break;
    auto close = open + 1;
    while (close < text.size() && is_placeholder_char(text[close])) ++close;
    if (close < text.size() && text[close] == '}' && close > open + 1) {
      on_literal(text.substr(i, open - i));
      on_slot(text.substr(open + 1, close - open - 1));
      i = close + 1;
    } else {
      on_literal(text.substr(i, open + 1 - i));
      i = open + 1;
    }
  }
  on_literal(text.substr(std::min(i, text.size())));
}

}  // namespace

PromptTemplate::PromptTemplate(PromptName name, std::string text) : name_(name), text_(std::move(text)) {
  scan_template(
      text_, [](std::string_view) {},
      [&](std::string_view slot) {
        if (std::find(placeholders_.begin(), placeholders_.end(), slot) == placeholders_.end()) {
          placeholders_.emplace_back(slot);
        }
      });
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& fills) const {
  std::vector<std::string> missing;
  for (const auto& p : placeholders_) {
    if (!fills.contains(p)) missing.push_back(p);
  }
  if (!missing.empty()) {
    std::string msg = "unfilled placeholder(s) in prompt '" + std::string(to_string(name_)) + "':";
    for (const auto& m : missing) msg += " " + m;
    throw RenderError(msg);
  }
  std::string out;
  out.reserve(text_.size() + 256);
  scan_template(
      text_, [&](std::string_view lit) { out += lit; },
      [&](std::string_view slot) { out += fills.at(std::string(slot)); });
  return out;
}

std::string cache_key(const std::string& prompt, const CompletionParams& params) {
  json j{{"model", params.model},
         {"temperature", params.temperature},
         {"max_tokens", params.max_tokens},
         {"prompt", prompt}};
  return util::sha256_hex(j.dump());
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() != ".json") continue;
    try {
      auto j = json::parse(util::read_file(entry.path()));
      replies_.emplace(j.at("key").get<std::string>(), j.at("reply").get<std::string>());
    } catch (const std::exception& e) {
      spdlog::warn("skipping unreadable cache entry {}: {}", entry.path().string(), e.what());
    }
  }
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = replies_.find(key);
  if (it == replies_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& prompt, const CompletionParams& params,
                        const std::string& reply) {
  json j{{"key", key},
         {"model", params.model},
         {"temperature", params.temperature},
         {"max_tokens", params.max_tokens},
         {"prompt", prompt},
         {"reply", reply},
         {"timestamp", static_cast<long long>(std::time(nullptr))}};
  std::unique_lock lock(mu_);
  util::write_file_atomic(dir_ / (key + ".json"), j.dump(2) + "\n");
  replies_.insert_or_assign(key, reply);
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return replies_.size();
}

std::size_t ResponseCache::purge() {
  std::unique_lock lock(mu_);
  std::size_t removed = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir_)) {
    if (entry.path().extension() == ".json") {
      std::filesystem::remove(entry.path());
      ++removed;
    }
  }
  replies_.clear();
  return removed;
}

HttpStatusError::HttpStatusError(int status, const std::string& body)
    : Error("completion request failed with HTTP " + std::to_string(status) + ": " + body.substr(0, 300)),
      status_(status) {}

ReplyParseError::ReplyParseError(const std::string& what, std::string raw)
    : Error(what + " (reply: \"" + raw + "\")"), raw_(std::move(raw)) {}

LlmClient::LlmClient(LlmConfig config, Transport* transport, ResponseCache* cache)
    : config_(std::move(config)),
      transport_(transport),
      cache_(cache),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }),
      in_flight_(std::max(1, config_.max_in_flight)) {}

CompletionParams LlmClient::params_for(PromptName name) const {
  CompletionParams p;
  auto it = config_.models.find(name);
  p.model = it != config_.models.end() ? it->second : config_.default_model;
  p.temperature = config_.temperature;
  return p;
}

std::string LlmClient::complete(const PromptTemplate& tmpl, const std::map<std::string, std::string>& fills) {
  return complete(tmpl, fills, params_for(tmpl.name()));
}

std::string LlmClient::complete(const PromptTemplate& tmpl, const std::map<std::string, std::string>& fills,
                                const CompletionParams& params) {
  return complete_rendered(tmpl.render(fills), params);
}

std::string LlmClient::complete_rendered(const std::string& prompt, const CompletionParams& params) {
  auto key = cache_key(prompt, params);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++cache_hits_;
      return *hit;
    }
  }
  auto reply = request(prompt, params);
  if (cache_) cache_->put(key, prompt, params, reply);
  return reply;
}

std::string LlmClient::request(const std::string& prompt, const CompletionParams& params) {
  if (!transport_) throw TransportError("no LLM endpoint configured and reply not cached");
  json body{{"model", params.model},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
            {"temperature", params.temperature}};
  if (params.max_tokens > 0) body["max_tokens"] = params.max_tokens;
  HttpRequest req;
  req.path = config_.chat_path;
  req.body = body.dump();
  if (!config_.api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + config_.api_key);

  std::string last_error;
  auto delay = config_.backoff_base;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(delay);
      delay = std::min(delay * 2, config_.backoff_max);
    }
    HttpResponse res;
    {
      in_flight_.acquire();
      struct Release {
        std::counting_semaphore<>& s;
        ~Release() { s.release(); }
      } release{in_flight_};
      ++network_calls_;
      res = transport_->post(req);
    }
    if (res.status == 200) {
      auto j = json::parse(res.body, nullptr, false);
      if (j.is_discarded()) throw Error("completion response is not JSON: " + res.body.substr(0, 200));
      try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(std::string("unexpected completion response shape: ") + e.what());
      }
    }
    bool retryable = res.status == 0 || res.status == 408 || res.status == 429 || res.status >= 500;
    if (!retryable) throw HttpStatusError(res.status, res.body);
    last_error = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status) + ": " + res.body.substr(0, 200);
    spdlog::warn("completion attempt {} failed ({}), retrying", attempt + 1, last_error);
  }
  throw TransportError("completion request failed after " + std::to_string(config_.max_retries + 1) +
                       " attempts: " + last_error);
}

// --- parsers ---------------------------------------------------------------

std::optional<bool> parse_relevance_reply(std::string_view reply) {
  auto pos = std::find_if(reply.begin(), reply.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
  if (pos == reply.end()) return std::nullopt;
  if (*pos == '1') return true;
  if (*pos == '2') return false;
  return std::nullopt;
}

StanceValue parse_stance_reply(std::string_view reply) {
  auto word = util::trim(reply);
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!word.empty() && is_punct(word.front())) word.remove_prefix(1);
  while (!word.empty() && is_punct(word.back())) word.remove_suffix(1);
  auto lower = util::to_lower(util::trim(word));
  if (lower == "negative") return StanceValue::against;
  if (lower == "neutral") return StanceValue::neutral;
  if (lower == "positive") return StanceValue::favor;
  throw ReplyParseError("stance reply is not one of negative|neutral|positive", std::string(reply));
}

namespace {

std::string strip_list_item(std::string_view item) {
  auto s = util::trim(item);
  // bullets and numbering: "-", "*", "•", "1.", "2)"
  if (s.starts_with("\xE2\x80\xA2")) s.remove_prefix(3);
  while (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '+')) s.remove_prefix(1);
  std::size_t digits = 0;
  while (digits < s.size() && std::isdigit(static_cast<unsigned char>(s[digits]))) ++digits;
  if (digits > 0 && digits < s.size() && (s[digits] == '.' || s[digits] == ')')) s.remove_prefix(digits + 1);
  s = util::trim(s);
  auto is_wrapper = [](char c) { return c == '"' || c == '\'' || c == '[' || c == ']' || c == '`'; };
  while (!s.empty() && is_wrapper(s.front())) s.remove_prefix(1);
  while (!s.empty() && (is_wrapper(s.back()) || s.back() == '.')) s.remove_suffix(1);
  return std::string(util::trim(s));
}

// Lowercase, punctuation dropped, whitespace collapsed.
std::string normalize_name(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc) || c == '-' || c == '_') {
      space = !out.empty();
    } else if (!std::ispunct(uc)) {
      if (space) out.push_back(' ');
      space = false;
      out.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> parse_list_reply(std::string_view reply) {
  std::vector<std::string> out;
  std::vector<std::string> seen;
  for (const auto& line : util::split(reply, '\n')) {
    for (const auto& piece : util::split(line, ',')) {
      auto item = strip_list_item(piece);
      if (item.empty()) continue;
      auto norm = util::to_lower(item);
      if (std::find(seen.begin(), seen.end(), norm) != seen.end()) continue;
      seen.push_back(norm);
      out.push_back(std::move(item));
    }
  }
  return out;
}

std::vector<std::string> match_candidates(const std::vector<std::string>& names,
                                          const std::vector<std::string>& candidates,
                                          std::vector<std::string>* dropped) {
  std::vector<bool> hit(candidates.size(), false);
  for (const auto& n : names) {
    auto norm = normalize_name(n);
    bool found = false;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (normalize_name(candidates[i]) == norm) {
        hit[i] = true;
        found = true;
      }
    }
    if (!found && dropped) dropped->push_back(n);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (hit[i]) out.push_back(candidates[i]);
  }
  return out;
}

std::vector<int> parse_pairwise_reply(std::string_view reply, std::size_t expected) {
  auto s = util::trim(reply);
  if (s.starts_with("```")) {
    auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
    if (auto fence = s.rfind("```"); fence != std::string_view::npos) s = s.substr(0, fence);
    s = util::trim(s);
  }
  if (s.starts_with('[')) s.remove_prefix(1);
  if (s.ends_with(']')) s.remove_suffix(1);
  std::vector<int> out;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (token != "1" && token != "2" && token != "3") {
      throw ReplyParseError("pairwise reply contains a token outside {1,2,3}: '" + token + "'", std::string(reply));
    }
    out.push_back(token[0] - '0');
    token.clear();
  };
  for (char c : s) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (out.size() != expected) {
    throw ReplyParseError("pairwise reply has " + std::to_string(out.size()) + " entries, expected " +
                              std::to_string(expected),
                          std::string(reply));
  }
  return out;
}

std::string python_list_literal(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    const auto& s = items[i];
    char quote = (s.find('\'') != std::string::npos && s.find('"') == std::string::npos) ? '"' : '\'';
    out.push_back(quote);
    for (char c : s) {
      if (c == '\\' || c == quote) out.push_back('\\');
      out.push_back(c);
    }
    out.push_back(quote);
  }
  out += "]";
  return out;
}

// --- prompt-level operations ----------------------------------------------------

std::optional<bool> llm_relevance(LlmClient& client, const DebateTopic& topic, const std::string& concept_label) {
  auto reply = client.complete(PromptTemplate::builtin(PromptName::relevance),
                               {{"topic", topic.question}, {"concept", concept_label}});
  return parse_relevance_reply(reply);
}

StanceValue llm_stance(LlmClient& client, const DebateTopic& topic, const Argument& argument,
                       const std::string& concept_label, StanceMode mode) {
  auto name = mode == StanceMode::zero_shot ? PromptName::stance_zero : PromptName::stance_few;
  auto reply = client.complete(PromptTemplate::builtin(name),
                               {{"topic", topic.question}, {"argument", argument.text}, {"aspect", concept_label}});
  return parse_stance_reply(reply);
}

std::vector<std::string> topic_stakeholders(const DebateTopic& topic, LlmClient& client) {
  auto reply = client.complete(PromptTemplate::builtin(PromptName::topic_stakeholders), {{"topic", topic.question}});
  auto groups = parse_list_reply(reply);
  if (groups.empty()) throw ReplyParseError("no stakeholder groups in reply", reply);
  return groups;
}

std::vector<std::string> argument_stakeholders(const Argument& argument,
                                               const std::vector<std::string>& candidate_groups,
                                               LlmClient& client) {
  if (candidate_groups.empty()) throw Error("argument_stakeholders needs at least one candidate group");
  std::string listed;
  for (std::size_t i = 0; i < candidate_groups.size(); ++i) {
    if (i) listed += ", ";
    listed += candidate_groups[i];
  }
  auto reply = client.complete(PromptTemplate::builtin(PromptName::argument_stakeholders),
                               {{"argument", argument.text}, {"stakeholders", listed}});
  std::vector<std::string> dropped;
  auto groups = match_candidates(parse_list_reply(reply), candidate_groups, &dropped);
  for (const auto& d : dropped) {
    spdlog::warn("argument {}: dropping stakeholder '{}' not among the candidates", argument.id, d);
  }
  if (groups.empty()) spdlog::warn("argument {}: no stakeholder group matched", argument.id);
  return groups;
}

std::vector<int> pairwise_acceptability(const Argument& arg1, const Argument& arg2,
                                        const std::vector<std::string>& concepts, LlmClient& client) {
  if (concepts.empty()) throw Error("pairwise_acceptability needs at least one concept");
  auto reply = client.complete(PromptTemplate::builtin(PromptName::pairwise_acceptability),
                               {{"argument_1", arg1.text},
                                {"argument_2", arg2.text},
                                {"concepts", python_list_literal(concepts)}});
  return parse_pairwise_reply(reply, concepts.size());
}

}  // namespace psv
