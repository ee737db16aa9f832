#include "psv/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <set>
#include <sstream>

#include "psv/corpus.hpp"
#include "psv/evalx.hpp"
#include "psv/graph.hpp"
#include "psv/report.hpp"
#include "psv/signature.hpp"
#include "psv/util.hpp"

namespace psv {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- config

void PipelineConfig::validate() const {
  if (k < 1) throw Error("k must be >= 1");
  if (top_m < 1) throw Error("top_m must be >= 1");
  if (families.empty()) throw Error("no aggregation family selected");
  for (const auto& f : filters) {
    if (f != "hypernym" && f != "relevance") throw Error("unknown filter '" + f + "' (hypernym|relevance)");
  }
  if (!(bin_width > 0.0)) throw Error("bin_width must be positive");
  if (top_n < 1) throw Error("top_n must be >= 1");
}

std::vector<Family> parse_families(std::string_view csv) {
  std::vector<Family> out;
  for (const auto& tok : util::split(csv, ',')) {
    auto t = util::trim(tok);
    if (t.empty()) continue;
    auto f = parse_family(t);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  if (out.empty()) throw Error("empty family list");
  return out;
}

std::vector<std::string> parse_filters(std::string_view csv) {
  std::vector<std::string> out;
  for (const auto& tok : util::split(csv, ',')) {
    auto t = std::string(util::trim(tok));
    if (t.empty() || t == "none") continue;
    if (t != "hypernym" && t != "relevance") throw Error("unknown filter '" + t + "' (hypernym|relevance)");
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error("unknown config key '" + key + "'" + (where.empty() ? "" : " in " + where));
    }
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

PipelineConfig parse_config(std::string_view contents, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(contents);
  } catch (const json::exception& e) {
    throw Error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("config must be a JSON object");
  reject_unknown(j,
                 {"corpus", "graph", "embeddings", "lemmas", "hypernyms", "annotations", "reliability", "cache_dir",
                  "out_dir", "k", "top_m", "predictor", "families", "filters", "threads", "llm", "embedding_service",
                  "report"},
                 "");
  PipelineConfig c;
  try {
    auto path_of = [&](const char* key, fs::path& dst) {
      if (j.contains(key)) dst = resolve(base_dir, j.at(key).get<std::string>());
    };
    path_of("corpus", c.corpus);
    path_of("graph", c.graph);
    path_of("embeddings", c.embeddings);
    path_of("lemmas", c.lemmas);
    path_of("hypernyms", c.hypernyms);
    path_of("annotations", c.annotations);
    path_of("reliability", c.reliability);
    path_of("cache_dir", c.cache_dir);
    path_of("out_dir", c.out_dir);
    if (j.contains("k")) c.k = j.at("k").get<int>();
    if (j.contains("top_m")) c.top_m = j.at("top_m").get<int>();
    if (j.contains("predictor")) c.predictor = parse_predictor(j.at("predictor").get<std::string>());
    if (j.contains("families")) {
      c.families.clear();
      for (const auto& f : j.at("families")) c.families.push_back(parse_family(f.get<std::string>()));
    }
    if (j.contains("filters")) c.filters = j.at("filters").get<std::vector<std::string>>();
    if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
    if (j.contains("llm")) {
      const auto& l = j.at("llm");
      reject_unknown(l,
                     {"base_url", "api_key_env", "chat_path", "model", "models", "temperature", "max_retries",
                      "max_in_flight", "pairwise_ablation"},
                     "llm");
      c.llm_base_url = l.value("base_url", c.llm_base_url);
      c.llm_api_key_env = l.value("api_key_env", c.llm_api_key_env);
      c.llm.chat_path = l.value("chat_path", c.llm.chat_path);
      c.llm.default_model = l.value("model", c.llm.default_model);
      if (l.contains("models")) {
        for (const auto& [name, model] : l.at("models").items()) {
          c.llm.models[parse_prompt_name(name)] = model.get<std::string>();
        }
      }
      c.llm.temperature = l.value("temperature", c.llm.temperature);
      c.llm.max_retries = l.value("max_retries", c.llm.max_retries);
      c.llm.max_in_flight = l.value("max_in_flight", c.llm.max_in_flight);
      c.pairwise_ablation = l.value("pairwise_ablation", c.pairwise_ablation);
    }
    if (j.contains("embedding_service")) {
      const auto& e = j.at("embedding_service");
      reject_unknown(e, {"base_url", "path", "model"}, "embedding_service");
      c.embed_base_url = e.value("base_url", c.embed_base_url);
      c.embed_path = e.value("path", c.embed_path);
      c.embed_model = e.value("model", c.embed_model);
    }
    if (j.contains("report")) {
      const auto& r = j.at("report");
      reject_unknown(r, {"family", "bin_width", "top_n"}, "report");
      if (r.contains("family")) c.report_family = parse_family(r.at("family").get<std::string>());
      c.bin_width = r.value("bin_width", c.bin_width);
      c.top_n = r.value("top_n", c.top_n);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(util::read_file(path), path.parent_path());
}

// ---------------------------------------------------------------- file helpers

namespace {

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

std::vector<std::string> parse_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

// A file read once; the hash covers exactly the parsed bytes.
struct Input {
  std::string name;
  fs::path path;
  std::string contents;
  std::string sha256;
};

Input read_input(const std::string& name, const fs::path& path) {
  if (path.empty()) throw Error("no path configured for " + name);
  if (!fs::exists(path)) throw Error(name + " not found: " + path.string());
  Input in{name, path, util::read_file(path), {}};
  in.sha256 = util::sha256_hex(in.contents);
  return in;
}

json provenance(std::string_view stage, const json& settings, const std::vector<const Input*>& inputs) {
  json list = json::array();
  for (const auto* in : inputs) {
    list.push_back({{"name", in->name}, {"path", in->path.generic_string()}, {"sha256", in->sha256}});
  }
  return {{"stage", stage}, {"config_sha256", util::sha256_hex(settings.dump())}, {"inputs", list}};
}

std::string provenance_line(const json& prov) { return "# provenance " + prov.dump() + "\n"; }

const char* stage_of(const std::string& artifact) {
  if (artifact == "alignment.jsonl") return "align";
  if (artifact == "signature.json") return "signature";
  if (artifact == "psv.csv") return "psv";
  if (artifact == "scores.csv") return "scores";
  if (artifact == "stakeholders.jsonl") return "stakeholders";
  return "?";
}

// Re-hashes every input recorded by an upstream artifact.
void check_fresh(const json& prov, const fs::path& artifact) {
  auto stage = prov.value("stage", std::string("?"));
  for (const auto& in : prov.at("inputs")) {
    fs::path p = in.at("path").get<std::string>();
    std::string why;
    if (!fs::exists(p)) {
      why = p.generic_string() + " no longer exists";
    } else if (util::sha256_file(p) != in.at("sha256").get<std::string>()) {
      why = p.generic_string() + " changed since it was written";
    }
    if (!why.empty()) {
      throw StaleArtifactError(artifact.generic_string() + " is stale: " + why + "; re-run `psv " + stage + "`");
    }
  }
}

// Reads an upstream artifact, verifying that it is fresh.
Input read_artifact(const fs::path& out_dir, const std::string& name) {
  auto path = out_dir / name;
  if (!fs::exists(path)) {
    throw Error("missing " + path.generic_string() + "; run `psv " + stage_of(name) + "` first");
  }
  Input in = read_input(name, path);
  json prov;
  try {
    if (name.ends_with(".csv")) {
      auto eol = in.contents.find('\n');
      auto first = in.contents.substr(0, eol);
      if (!first.starts_with("# provenance ")) throw Error("no provenance line");
      prov = json::parse(first.substr(13));
    } else if (name.ends_with(".jsonl")) {
      prov = json::parse(in.contents.substr(0, in.contents.find('\n'))).at("provenance");
    } else {
      prov = json::parse(in.contents).at("provenance");
    }
  } catch (const std::exception& e) {
    throw Error("cannot read provenance of " + path.generic_string() + ": " + e.what());
  }
  check_fresh(prov, path);
  return in;
}

// CSV body rows after the provenance and header lines.
std::vector<std::vector<std::string>> csv_rows(const Input& in, const std::vector<std::string>& header) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(in.contents);
  std::string line;
  std::getline(is, line);  // provenance
  std::getline(is, line);
  if (parse_csv_line(line) != header) throw Error(in.path.generic_string() + ": unexpected header");
  std::size_t line_no = 2;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto row = parse_csv_line(line);
    if (row.size() != header.size()) {
      throw ParseError(in.path.generic_string(), line_no, "expected " + std::to_string(header.size()) + " fields");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json llm_settings(const LlmConfig& l) {
  json models = json::object();
  for (const auto& [name, model] : l.models) models[std::string(to_string(name))] = model;
  return {{"model", l.default_model}, {"models", models}, {"temperature", l.temperature}};
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

// ---------------------------------------------------------------- artifact codecs

AlignedSets parse_alignment(const Input& in) {
  AlignedSets out;
  std::istringstream is(in.contents);
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto j = json::parse(line);
    auto& set = out[j.at("argument_id").get<std::string>()];
    for (const auto& c : j.at("concepts")) set.insert(c.get<std::string>());
  }
  return out;
}

std::string side_name(Side s) { return std::string(to_string(s)); }

std::vector<Signature> parse_signatures(const Input& in) {
  std::vector<Signature> out;
  auto j = json::parse(in.contents);
  for (const auto& t : j.at("signatures")) {
    Signature sig;
    sig.topic_id = t.at("topic_id").get<std::string>();
    sig.k = t.at("k").get<int>();
    sig.filters_applied = t.at("filters").get<std::vector<std::string>>();
    sig.warnings = t.at("warnings").get<std::vector<std::string>>();
    for (const auto& c : t.at("concepts")) {
      SignatureEntry e{c.at("concept").get<std::string>(), parse_side(c.at("side").get<std::string>()),
                       c.at("score").get<double>()};
      sig.candidates.push_back(e);
      if (c.at("survived_filters").get<bool>()) sig.concepts.push_back(e);
    }
    out.push_back(std::move(sig));
  }
  return out;
}

std::map<std::string, Signature> by_topic(const std::vector<Signature>& sigs) {
  std::map<std::string, Signature> out;
  for (const auto& s : sigs) out.emplace(s.topic_id, s);
  return out;
}

const std::vector<std::string> kPsvHeader = {"topic_id", "argument_id", "concept", "s",
                                             "p_against", "p_neutral", "p_favor"};
const std::vector<std::string> kScoresHeader = {"topic", "arg1", "arg2", "family", "channel", "concept", "value"};

// PSVs keyed by argument id, checked against the signature order.
std::map<std::string, PsvPair> parse_psvs(const Input& in, const std::map<std::string, Signature>& sigs) {
  std::map<std::string, PsvPair> out;
  for (const auto& row : csv_rows(in, kPsvHeader)) {
    const auto& topic = row[0];
    const auto& arg = row[1];
    auto& psv = out[arg];
    if (psv.discrete.argument_id.empty()) {
      psv.discrete.argument_id = psv.prob.argument_id = arg;
      psv.discrete.signature_ref = psv.prob.signature_ref = topic;
    }
    auto st = sigs.find(topic);
    auto idx = psv.discrete.values.size();
    if (st == sigs.end() || idx >= st->second.concepts.size() || st->second.concepts[idx].concept_label != row[2]) {
      throw StaleArtifactError(in.path.generic_string() + " does not match signature.json; re-run `psv psv`");
    }
    psv.discrete.values.push_back(stance_from_int(std::stoi(row[3])));
    psv.prob.rows.push_back({util::parse_double(row[4]), util::parse_double(row[5]), util::parse_double(row[6])});
  }
  return out;
}

struct ScoreSet {
  std::vector<Family> families;  // in file order
  std::map<Family, std::vector<ReportPair>> pairs;
};

ScoreSet parse_scores(const Input& in, const Corpus& corpus, const std::map<std::string, Signature>& sigs) {
  ScoreSet out;
  std::map<std::tuple<Family, std::string, std::string>, std::size_t> index;
  for (const auto& row : csv_rows(in, kScoresHeader)) {
    auto family = parse_family(row[3]);
    auto channel = parse_channel(row[4]);
    auto& list = out.pairs[family];
    if (std::find(out.families.begin(), out.families.end(), family) == out.families.end()) {
      out.families.push_back(family);
    }
    auto key = std::make_tuple(family, row[1], row[2]);
    auto it = index.find(key);
    if (it == index.end()) {
      ReportPair p;
      p.topic_id = row[0];
      p.same_stance = corpus.argument(row[1]).stance == corpus.argument(row[2]).stance;
      p.scores.arg1_id = row[1];
      p.scores.arg2_id = row[2];
      p.scores.family = family;
      list.push_back(std::move(p));
      it = index.emplace(key, list.size() - 1).first;
    }
    auto& scores = list[it->second].scores;
    double value = util::parse_double(row[6]);
    if (row[5] == "GLOBAL") {
      scores.global[channel] = value;
    } else {
      auto& vals = scores.per_concept[channel];
      auto st = sigs.find(row[0]);
      if (st == sigs.end() || vals.size() >= st->second.concepts.size() ||
          st->second.concepts[vals.size()].concept_label != row[5]) {
        throw StaleArtifactError(in.path.generic_string() + " does not match signature.json; re-run `psv scores`");
      }
      vals.push_back(value);
    }
  }
  return out;
}

PairScoreMap to_map(const std::vector<ReportPair>& pairs) {
  PairScoreMap m;
  for (const auto& p : pairs) m.emplace(PairKey(p.scores.arg1_id, p.scores.arg2_id), p.scores);
  return m;
}

void require_paths(std::initializer_list<std::pair<const char*, const fs::path*>> paths) {
  for (const auto& [name, p] : paths) {
    if (p->empty()) throw Error("config does not set '" + std::string(name) + "'");
    if (!fs::exists(*p)) throw Error(std::string(name) + " not found: " + p->generic_string());
  }
}

void require_optional(std::initializer_list<std::pair<const char*, const fs::path*>> paths) {
  for (const auto& [name, p] : paths) {
    if (!p->empty() && !fs::exists(*p)) throw Error(std::string(name) + " not found: " + p->generic_string());
  }
}

class CountingTransport : public Transport {
 public:
  CountingTransport(std::shared_ptr<Transport> inner, std::atomic<std::size_t>& count)
      : inner_(std::move(inner)), count_(count) {}
  HttpResponse post(const HttpRequest& request) override {
    ++count_;
    return inner_->post(request);
  }

 private:
  std::shared_ptr<Transport> inner_;
  std::atomic<std::size_t>& count_;
};

}  // namespace

// ---------------------------------------------------------------- pipeline

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<Transport> llm_transport,
                   std::shared_ptr<Transport> embed_transport)
    : config_(std::move(config)), llm_transport_(std::move(llm_transport)), embed_transport_(std::move(embed_transport)) {
  config_.validate();
  if (config_.threads == 0) config_.threads = util::default_threads();
  if (!llm_transport_ && !config_.llm_base_url.empty()) {
    llm_transport_ = std::make_shared<HttpTransport>(config_.llm_base_url);
  }
  if (!embed_transport_ && !config_.embed_base_url.empty()) {
    embed_transport_ = std::make_shared<HttpTransport>(config_.embed_base_url);
  }
  if (embed_transport_) embed_transport_ = std::make_shared<CountingTransport>(embed_transport_, embed_calls_);
}

Pipeline::~Pipeline() = default;

LlmClient& Pipeline::llm() {
  if (!client_) {
    cache_ = std::make_unique<ResponseCache>(config_.cache_dir);
    auto cfg = config_.llm;
    if (cfg.api_key.empty() && !config_.llm_api_key_env.empty()) {
      if (const char* key = std::getenv(config_.llm_api_key_env.c_str())) cfg.api_key = key;
    }
    client_ = std::make_unique<LlmClient>(cfg, llm_transport_.get(), cache_.get());
  }
  return *client_;
}

std::size_t Pipeline::network_calls() const {
  return (client_ ? client_->network_calls() : 0) + embed_calls_.load();
}

void Pipeline::align() {
  require_paths({{"corpus", &config_.corpus}, {"graph", &config_.graph}, {"embeddings", &config_.embeddings}});
  auto corpus_in = read_input("corpus", config_.corpus);
  auto graph_in = read_input("graph", config_.graph);
  auto emb_in = read_input("embeddings", config_.embeddings);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto graph = parse_graph(graph_in.contents, graph_in.path.string());
  auto store = parse_embeddings(emb_in.contents, emb_in.path.string());
  spdlog::info("align: {} arguments, {} graph nodes, {} embeddings", corpus.arguments().size(), graph.node_count(),
               store.size());

  std::unique_ptr<TextEmbedder> embedder;
  if (embed_transport_) {
    std::string key;
    if (const char* k = std::getenv(config_.llm_api_key_env.c_str())) key = k;
    embedder = std::make_unique<ServiceEmbedder>(*embed_transport_, config_.embed_path, config_.embed_model, key);
  } else {
    embedder = std::make_unique<StoreEmbedder>(store);
  }

  const auto& args = corpus.arguments();
  std::vector<ArgumentConcepts> results(args.size());
  AlignOptions opts{config_.top_m};
  util::parallel_for(args.size(), config_.threads, [&](std::size_t i) {
    try {
      results[i] = align_argument(args[i].id, args[i].text, graph, store, *embedder, opts);
    } catch (const std::exception& e) {
      throw Error("aligning argument '" + args[i].id + "': " + e.what());
    }
  });

  json settings = {{"top_m", config_.top_m}, {"embed_model", config_.embed_model}};
  std::string out = json{{"provenance", provenance("align", settings, {&corpus_in, &graph_in, &emb_in})}}.dump() + "\n";
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& r = results[i];
    json rec = {{"argument_id", r.argument_id},
                {"topic_id", args[i].topic_id},
                {"concepts", r.concepts},
                {"anchors", r.anchor_concepts},
                {"path_concepts", r.path_concepts}};
    out += rec.dump() + "\n";
  }
  util::write_file_atomic(output("alignment.jsonl"), out);
  spdlog::info("align: wrote {}", output("alignment.jsonl").generic_string());
}

void Pipeline::signature() {
  require_paths({{"corpus", &config_.corpus}});
  require_optional({{"lemmas", &config_.lemmas}, {"hypernyms", &config_.hypernyms}});
  bool use_hypernym = std::find(config_.filters.begin(), config_.filters.end(), "hypernym") != config_.filters.end();
  if (use_hypernym) require_paths({{"hypernyms", &config_.hypernyms}});

  auto align_in = read_artifact(config_.out_dir, "alignment.jsonl");
  auto corpus_in = read_input("corpus", config_.corpus);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto aligned = parse_alignment(align_in);
  std::vector<const Input*> inputs = {&align_in, &corpus_in};

  std::optional<Input> lemma_in, hyper_in;
  LemmaTable lemmas;
  HypernymTable hypernyms;
  if (!config_.lemmas.empty()) {
    lemma_in = read_input("lemmas", config_.lemmas);
    lemmas = parse_lemmas(lemma_in->contents, lemma_in->path.string());
    inputs.push_back(&*lemma_in);
  }
  if (use_hypernym) {
    hyper_in = read_input("hypernyms", config_.hypernyms);
    hypernyms = parse_hypernyms(hyper_in->contents, hyper_in->path.string());
    inputs.push_back(&*hyper_in);
  }

  json sigs = json::array();
  for (const auto& topic : corpus.topics()) {
    auto scored = score_concepts(topic.id, aligned, corpus);
    if (lemma_in) scored = dedup_lemmas(std::move(scored), lemmas);
    auto sig = select_top_k(topic.id, scored, config_.k);
    for (const auto& f : config_.filters) {
      if (f == "hypernym") {
        sig = filter_hypernyms(std::move(sig), hypernyms, lemmas);
      } else {
        sig = filter_relevance(std::move(sig), topic, llm(), config_.threads);
      }
    }
    std::set<std::string> kept;
    for (const auto& e : sig.concepts) kept.insert(e.concept_label);
    json concepts = json::array();
    for (const auto& e : sig.candidates) {
      concepts.push_back({{"concept", e.concept_label},
                          {"side", side_name(e.side)},
                          {"score", e.score},
                          {"survived_filters", kept.contains(e.concept_label)}});
    }
    sigs.push_back({{"topic_id", topic.id},
                    {"k", sig.k},
                    {"filters", sig.filters_applied},
                    {"warnings", sig.warnings},
                    {"concepts", concepts}});
    spdlog::info("signature: topic {} -> {} of {} candidate concepts", topic.id, sig.concepts.size(),
                 sig.candidates.size());
  }
  json settings = {{"k", config_.k}, {"filters", config_.filters}, {"llm", llm_settings(config_.llm)}};
  json doc = {{"provenance", provenance("signature", settings, inputs)}, {"signatures", sigs}};
  util::write_file_atomic(output("signature.json"), doc.dump(2) + "\n");
}

void Pipeline::psv() {
  require_paths({{"corpus", &config_.corpus}});
  auto sig_in = read_artifact(config_.out_dir, "signature.json");
  auto align_in = read_artifact(config_.out_dir, "alignment.jsonl");
  auto corpus_in = read_input("corpus", config_.corpus);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto sigs = by_topic(parse_signatures(sig_in));
  auto aligned = parse_alignment(align_in);

  std::unique_ptr<StancePredictor> predictor;
  switch (config_.predictor) {
    case PredictorKind::baseline: predictor = std::make_unique<BaselinePredictor>(aligned); break;
    case PredictorKind::llm_zero:
      predictor = std::make_unique<LlmPredictor>(llm(), corpus, StanceMode::zero_shot);
      break;
    case PredictorKind::llm_few: predictor = std::make_unique<LlmPredictor>(llm(), corpus, StanceMode::few_shot); break;
  }

  const auto& args = corpus.arguments();
  for (const auto& a : args) {
    if (!sigs.contains(a.topic_id)) throw StaleArtifactError("signature.json has no topic '" + a.topic_id + "'");
  }
  std::vector<PsvPair> psvs(args.size());
  util::parallel_for(args.size(), config_.threads, [&](std::size_t i) {
    psvs[i] = build_psv(args[i], sigs.at(args[i].topic_id), *predictor);
  });

  json settings = {{"predictor", to_string(config_.predictor)}, {"llm", llm_settings(config_.llm)}};
  std::string out = provenance_line(provenance("psv", settings, {&sig_in, &align_in, &corpus_in}));
  out += csv_row(kPsvHeader);
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& sig = sigs.at(args[i].topic_id);
    for (std::size_t c = 0; c < sig.concepts.size(); ++c) {
      const auto& row = psvs[i].prob.rows[c];
      out += csv_row({args[i].topic_id, args[i].id, sig.concepts[c].concept_label,
                      std::to_string(sign(psvs[i].discrete.values[c])), util::format_double(row[kAgainst]),
                      util::format_double(row[kNeutral]), util::format_double(row[kFavor])});
    }
  }
  util::write_file_atomic(output("psv.csv"), out);
  spdlog::info("psv: {} arguments with predictor {}", args.size(), to_string(config_.predictor));
}

void Pipeline::scores() {
  require_paths({{"corpus", &config_.corpus}});
  auto psv_in = read_artifact(config_.out_dir, "psv.csv");
  auto sig_in = read_artifact(config_.out_dir, "signature.json");
  auto corpus_in = read_input("corpus", config_.corpus);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto sigs = by_topic(parse_signatures(sig_in));
  auto psvs = parse_psvs(psv_in, sigs);

  struct Job {
    const DebateTopic* topic;
    const PsvPair* a;
    const PsvPair* b;
  };
  std::vector<Job> jobs;
  for (const auto& topic : corpus.topics()) {
    auto args = corpus.arguments_of(topic.id);
    for (std::size_t i = 0; i < args.size(); ++i) {
      for (std::size_t j = i + 1; j < args.size(); ++j) {
        auto pa = psvs.find(args[i]->id), pb = psvs.find(args[j]->id);
        if (pa == psvs.end() || pb == psvs.end()) {
          throw StaleArtifactError("psv.csv lacks arguments of topic '" + topic.id + "'; re-run `psv psv`");
        }
        jobs.push_back({&topic, &pa->second, &pb->second});
      }
    }
  }

  std::vector<std::string> chunks(jobs.size());
  util::parallel_for(jobs.size(), config_.threads, [&](std::size_t n) {
    const auto& job = jobs[n];
    const auto& sig = sigs.at(job.topic->id);
    std::string text;
    for (auto family : config_.families) {
      auto s = pair_scores(*job.a, *job.b, family);
      for (auto c : channels_of(family)) {
        const auto& vals = s.concept_values(c);
        std::string fam(to_string(family)), ch(to_string(c));
        for (std::size_t i = 0; i < vals.size(); ++i) {
          text += csv_row({job.topic->id, s.arg1_id, s.arg2_id, fam, ch, sig.concepts[i].concept_label,
                           util::format_double(vals[i])});
        }
        text += csv_row({job.topic->id, s.arg1_id, s.arg2_id, fam, ch, "GLOBAL", util::format_double(s.global_value(c))});
      }
    }
    chunks[n] = std::move(text);
  });

  std::vector<std::string> fams;
  for (auto f : config_.families) fams.emplace_back(to_string(f));
  std::string out = provenance_line(provenance("scores", {{"families", fams}}, {&psv_in, &sig_in, &corpus_in}));
  out += csv_row(kScoresHeader);
  for (auto& c : chunks) out += c;
  util::write_file_atomic(output("scores.csv"), out);
  spdlog::info("scores: {} pairs x {} families", jobs.size(), config_.families.size());
}

void Pipeline::eval() {
  require_paths({{"corpus", &config_.corpus}});
  require_optional({{"annotations", &config_.annotations}, {"reliability", &config_.reliability}});
  auto scores_in = read_artifact(config_.out_dir, "scores.csv");
  auto sig_in = read_artifact(config_.out_dir, "signature.json");
  auto psv_in = read_artifact(config_.out_dir, "psv.csv");
  auto corpus_in = read_input("corpus", config_.corpus);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto sig_list = parse_signatures(sig_in);
  auto sigs = by_topic(sig_list);
  auto score_set = parse_scores(scores_in, corpus, sigs);
  std::vector<const Input*> inputs = {&scores_in, &sig_in, &psv_in, &corpus_in};

  std::optional<Input> ann_in, rel_in;
  AnnotationSet ann;
  if (!config_.annotations.empty()) {
    ann_in = read_input("annotations", config_.annotations);
    ann = parse_annotations(ann_in->contents, corpus, ann_in->path.string());
    inputs.push_back(&*ann_in);
  } else {
    spdlog::info("eval: no annotations configured; running the same-side protocol only");
  }
  if (!config_.reliability.empty()) {
    rel_in = read_input("reliability", config_.reliability);
    inputs.push_back(&*rel_in);
  }

  std::map<std::string, std::vector<std::string>> concepts;
  for (const auto& s : sig_list) concepts[s.topic_id] = s.concept_labels();

  std::vector<Family> families;
  for (auto f : config_.families) {
    if (score_set.pairs.contains(f)) {
      families.push_back(f);
    } else {
      spdlog::warn("eval: scores.csv has no rows for family {}", to_string(f));
    }
  }

  std::vector<MetricRecord> records;
  auto add_auc = [&](const std::string& protocol, const std::string& mode, Channel c, auto&& compute) {
    try {
      AucResult r = compute();
      records.push_back({protocol, mode, std::string(to_string(c)), "roc_auc", r.auc, r.n});
    } catch (const ChannelUndefinedError&) {
      throw;
    } catch (const Error& e) {
      spdlog::warn("eval: {} {} {}: {}", protocol, mode, to_string(c), e.what());
    }
  };

  if (ann_in && !ann.pair_global_labels.empty()) {
    for (auto f : families) {
      auto m = to_map(score_set.pairs[f]);
      for (auto c : channels_of(f)) {
        add_auc("global", std::string(to_string(f)), c, [&] { return eval_global_acceptability(m, ann, c); });
      }
    }
  }
  if (ann_in && !ann.pair_concept_labels.empty()) {
    for (auto f : families) {
      auto m = to_map(score_set.pairs[f]);
      for (auto c : channels_of(f)) {
        add_auc("perspectivized", std::string(to_string(f)), c,
                [&] { return eval_perspectivized(m, ann, corpus, concepts, c); });
      }
    }
    if (config_.pairwise_ablation) {
      std::vector<PairKey> keys;
      for (const auto& [key, label] : ann.pair_concept_labels) {
        if (key.first.first != key.first.second && (keys.empty() || keys.back() != key.first)) {
          keys.push_back(key.first);
        }
      }
      std::vector<PairScores> direct(keys.size());
      auto& client = llm();
      util::parallel_for(keys.size(), config_.threads, [&](std::size_t i) {
        const auto& a = corpus.argument(keys[i].first);
        const auto& b = corpus.argument(keys[i].second);
        const auto& labels = concepts.at(a.topic_id);
        std::vector<int> codes;
        try {
          codes = pairwise_acceptability(a, b, labels, client);
        } catch (const ReplyParseError& e) {
          spdlog::warn("pairwise reply for {}|{} unusable ({}); treating as neutral", a.id, b.id, e.what());
          codes.assign(labels.size(), 2);
        }
        PairScores s;
        s.arg1_id = a.id;
        s.arg2_id = b.id;
        s.family = Family::P0;
        const std::pair<Channel, int> code_of[] = {
            {Channel::agreement, 1}, {Channel::orthogonality, 2}, {Channel::disagreement, 3}};
        for (auto [c, code] : code_of) {
          auto& vals = s.per_concept[c];
          double sum = 0.0;
          for (int v : codes) {
            vals.push_back(v == code ? 1.0 : 0.0);
            sum += vals.back();
          }
          s.global[c] = labels.empty() ? 0.0 : sum / static_cast<double>(labels.size());
        }
        direct[i] = std::move(s);
      });
      PairScoreMap m;
      for (std::size_t i = 0; i < keys.size(); ++i) m.emplace(keys[i], direct[i]);
      for (auto c : kAllChannels) {
        add_auc("perspectivized", "no_psv", c, [&] { return eval_perspectivized(m, ann, corpus, concepts, c); });
      }
    }
  }
  for (auto f : families) {
    for (auto c : channels_of(f)) {
      std::vector<ScoredPair> pairs;
      for (const auto& p : score_set.pairs[f]) pairs.push_back({p.scores.arg1_id, p.scores.arg2_id, p.scores.global_value(c)});
      add_auc("same_side", std::string(to_string(f)), c, [&] { return eval_same_side(pairs, corpus, c); });
    }
  }

  if (ann_in && !ann.signature_labels.empty()) {
    auto se = eval_signature(sig_list, ann);
    std::string mode = config_.filters.empty() ? "none" : join(config_.filters, "+");
    for (auto [name, prf] : {std::pair{"relevance", se.relevance}, std::pair{"granularity", se.granularity}}) {
      records.push_back({"signature", mode, name, "precision", prf.precision, se.n_labeled});
      records.push_back({"signature", mode, name, "recall", prf.recall, se.n_labeled});
      records.push_back({"signature", mode, name, "f1", prf.f1, se.n_labeled});
    }
  }
  if (ann_in && !ann.stance_labels.empty()) {
    auto psv_map = parse_psvs(psv_in, sigs);
    std::vector<PsvPair> psvs;
    for (const auto& a : corpus.arguments()) {
      if (auto it = psv_map.find(a.id); it != psv_map.end()) psvs.push_back(it->second);
    }
    std::string mode(to_string(config_.predictor));
    for (bool appropriate : {false, true}) {
      auto st = eval_stance(psvs, sigs, corpus, ann, appropriate);
      if (st.n == 0) continue;
      std::string subset = appropriate ? "appropriate" : "all";
      records.push_back({"stance", mode, subset, "macro_f1", st.f1.macro, st.n});
      for (std::size_t k = 0; k < kStanceClasses.size(); ++k) {
        records.push_back({"stance", mode, subset, "f1_" + kStanceClasses[k], st.f1.per_class[k], st.n});
      }
    }
  }
  if (rel_in) {
    auto data = parse_reliability(rel_in->contents, rel_in->path.string());
    records.push_back({"iaa", "reliability", "all", "krippendorff_alpha", krippendorff_alpha_nominal(data),
                       data.items.size()});
  }

  std::vector<std::string> fams;
  for (auto f : config_.families) fams.emplace_back(to_string(f));
  json settings = {{"families", fams}, {"pairwise_ablation", config_.pairwise_ablation}, {"filters", config_.filters},
                   {"predictor", to_string(config_.predictor)}};
  auto prov = provenance_line(provenance("eval", settings, inputs));
  std::string out = prov + csv_row({"protocol", "family", "channel", "metric", "value", "n"});
  for (const auto& r : records) {
    out += csv_row({r.protocol, r.family, r.channel, r.metric, util::format_double(r.value), std::to_string(r.n)});
  }
  util::write_file_atomic(output("eval.csv"), out);
  auto table = format_acceptability_table(records);
  util::write_file_atomic(output("eval_table.txt"), prov + table);
  spdlog::info("eval: {} metric records\n{}", records.size(), table);
}

void Pipeline::stakeholders() {
  require_paths({{"corpus", &config_.corpus}});
  auto corpus_in = read_input("corpus", config_.corpus);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto& client = llm();

  const auto& topics = corpus.topics();
  std::vector<std::vector<std::string>> topic_groups(topics.size());
  util::parallel_for(topics.size(), config_.threads,
                     [&](std::size_t i) { topic_groups[i] = topic_stakeholders(topics[i], client); });
  std::map<std::string, std::size_t> topic_index;
  for (std::size_t i = 0; i < topics.size(); ++i) topic_index[topics[i].id] = i;

  const auto& args = corpus.arguments();
  std::vector<std::vector<std::string>> arg_groups(args.size());
  util::parallel_for(args.size(), config_.threads, [&](std::size_t i) {
    const auto& groups = topic_groups[topic_index.at(args[i].topic_id)];
    try {
      arg_groups[i] = argument_stakeholders(args[i], groups, client);
    } catch (const ReplyParseError& e) {
      spdlog::warn("stakeholders for argument {}: {}; leaving unassigned", args[i].id, e.what());
    }
  });

  std::string out =
      json{{"provenance", provenance("stakeholders", {{"llm", llm_settings(config_.llm)}}, {&corpus_in})}}.dump() + "\n";
  for (std::size_t i = 0; i < topics.size(); ++i) {
    out += json{{"topic_id", topics[i].id}, {"groups", topic_groups[i]}}.dump() + "\n";
  }
  for (std::size_t i = 0; i < args.size(); ++i) {
    out += json{{"argument_id", args[i].id}, {"topic_id", args[i].topic_id}, {"groups", arg_groups[i]}}.dump() + "\n";
  }
  util::write_file_atomic(output("stakeholders.jsonl"), out);
  spdlog::info("stakeholders: {} topics, {} arguments labeled", topics.size(), args.size());
}

void Pipeline::report() {
  require_paths({{"corpus", &config_.corpus}});
  auto scores_in = read_artifact(config_.out_dir, "scores.csv");
  auto sig_in = read_artifact(config_.out_dir, "signature.json");
  auto corpus_in = read_input("corpus", config_.corpus);
  auto corpus = parse_corpus(corpus_in.contents, corpus_in.path.string());
  auto sigs = by_topic(parse_signatures(sig_in));
  auto score_set = parse_scores(scores_in, corpus, sigs);
  std::vector<const Input*> inputs = {&scores_in, &sig_in, &corpus_in};

  const auto family = config_.report_family;
  if (!score_set.pairs.contains(family)) {
    throw Error("scores.csv has no rows for report family " + std::string(to_string(family)) +
                "; add it to the families and re-run `psv scores`");
  }
  const auto& pairs = score_set.pairs.at(family);

  // Stakeholder labels: stakeholders.jsonl when present, else the corpus field.
  std::map<std::string, std::vector<std::string>> groups_of;
  std::map<std::string, std::vector<std::string>> topic_groups;
  std::optional<Input> sh_in;
  if (fs::exists(output("stakeholders.jsonl"))) {
    sh_in = read_artifact(config_.out_dir, "stakeholders.jsonl");
    inputs.push_back(&*sh_in);
    std::istringstream is(sh_in->contents);
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      auto j = json::parse(line);
      auto groups = j.at("groups").get<std::vector<std::string>>();
      if (j.contains("argument_id")) {
        groups_of[j.at("argument_id").get<std::string>()] = groups;
      } else {
        topic_groups[j.at("topic_id").get<std::string>()] = groups;
      }
    }
  } else {
    for (const auto& a : corpus.arguments()) {
      if (!a.stakeholders) continue;
      groups_of[a.id] = *a.stakeholders;
      auto& tg = topic_groups[a.topic_id];
      for (const auto& g : *a.stakeholders) {
        if (std::find(tg.begin(), tg.end(), g) == tg.end()) tg.push_back(g);
      }
    }
    for (auto& [t, g] : topic_groups) std::sort(g.begin(), g.end());
  }

  json settings = {{"family", to_string(family)}, {"bin_width", config_.bin_width}, {"top_n", config_.top_n}};
  auto prov = provenance_line(provenance("report", settings, inputs));
  auto fmt = [](double v) { return util::format_double(v); };

  std::string matrix = prov + csv_row({"topic", "g1", "g2", "channel", "value", "n_pairs"});
  std::string top = prov + csv_row({"topic", "subset", "channel", "rank", "concept", "mean", "n_pairs"});
  std::string scatter =
      prov + csv_row({"topic", "arg1", "arg2", "agreement", "disagreement", "orthogonality", "same_stance"});
  std::string hist = prov + csv_row({"topic", "same_stance", "bin_lo", "bin_hi", "count"});

  for (const auto& topic : corpus.topics()) {
    std::vector<ReportPair> tp;
    for (const auto& p : pairs) {
      if (p.topic_id == topic.id) tp.push_back(p);
    }
    if (tp.empty()) continue;
    auto tg = topic_groups.find(topic.id);
    if (tg != topic_groups.end() && !tg->second.empty()) {
      for (auto c : channels_of(family)) {
        for (const auto& cell : stakeholder_matrix(tp, groups_of, tg->second, c)) {
          matrix += csv_row({topic.id, cell.g1, cell.g2, std::string(to_string(c)),
                             cell.value ? fmt(*cell.value) : "NA", std::to_string(cell.n_pairs)});
        }
      }
    } else {
      spdlog::warn("report: no stakeholder labels for topic {}; run `psv stakeholders`", topic.id);
    }
    auto labels = sigs.at(topic.id).concept_labels();
    for (auto subset : {PairSubset::all, PairSubset::same_stance, PairSubset::cross_stance}) {
      for (auto c : channels_of(family)) {
        auto ranked = top_perspectives(tp, labels, c, subset, static_cast<std::size_t>(config_.top_n));
        for (std::size_t r = 0; r < ranked.size(); ++r) {
          top += csv_row({topic.id, std::string(to_string(subset)), std::string(to_string(c)), std::to_string(r + 1),
                          ranked[r].concept_label, fmt(ranked[r].mean), std::to_string(ranked[r].n_pairs)});
        }
      }
    }
    for (const auto& p : tp) {
      const auto& s = p.scores;
      scatter += csv_row({topic.id, s.arg1_id, s.arg2_id, fmt(s.global_value(Channel::agreement)),
                          fmt(s.global_value(Channel::disagreement)),
                          has_channel(family, Channel::orthogonality) ? fmt(s.global_value(Channel::orthogonality))
                                                                      : "NA",
                          p.same_stance ? "1" : "0"});
    }
    for (const auto& b : histogram(tp, Channel::disagreement, config_.bin_width)) {
      hist += csv_row({topic.id, b.same_stance ? "1" : "0", fmt(b.lo), fmt(b.hi), std::to_string(b.count)});
    }
  }
  util::write_file_atomic(output("stakeholder_matrix.csv"), matrix);
  util::write_file_atomic(output("top_perspectives.csv"), top);
  util::write_file_atomic(output("scatter.csv"), scatter);
  util::write_file_atomic(output("histogram.csv"), hist);
  spdlog::info("report: {} pairs under {}", pairs.size(), to_string(family));
}

std::size_t Pipeline::cache_purge() {
  ResponseCache cache(config_.cache_dir);
  auto n = cache.purge();
  spdlog::info("cache-purge: removed {} entries from {}", n, config_.cache_dir.generic_string());
  return n;
}

void Pipeline::run_all(bool with_stakeholders) {
  align();
  signature();
  psv();
  scores();
  eval();
  if (with_stakeholders) stakeholders();
  report();
}

}  // namespace psv
