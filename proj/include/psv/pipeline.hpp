#pragma once

// File-based pipeline stages. Every stage reads its inputs, checks upstream
// artifacts against the hashes they recorded, and writes one output file (or
// a small set of report files) into the output directory.
//
// Outputs:
//   align         alignment.jsonl
//   signature     signature.json
//   psv           psv.csv
//   scores        scores.csv
//   eval          eval.csv, eval_table.txt
//   stakeholders  stakeholders.jsonl
//   report        stakeholder_matrix.csv, top_perspectives.csv, scatter.csv, histogram.csv
//
// JSON outputs carry a "provenance" object; CSV and text outputs start with a
// "# provenance {...}" line followed by the column header.

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "psv/aggregate.hpp"
#include "psv/llm.hpp"
#include "psv/stance.hpp"
#include "psv/transport.hpp"

namespace psv {

class StaleArtifactError : public Error {
 public:
  using Error::Error;
};

struct PipelineConfig {
  // Relative paths in a config file resolve against the file's directory.
  std::filesystem::path corpus;
  std::filesystem::path graph;
  std::filesystem::path embeddings;
  std::filesystem::path lemmas;       // optional
  std::filesystem::path hypernyms;    // required by the hypernym filter
  std::filesystem::path annotations;  // optional
  std::filesystem::path reliability;  // optional, item/annotator/label TSV
  std::filesystem::path cache_dir = ".psv_cache";
  std::filesystem::path out_dir = "out";

  int k = 5;
  int top_m = 3;
  PredictorKind predictor = PredictorKind::baseline;
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  std::vector<std::string> filters;  // applied in order: hypernym, relevance
  std::size_t threads = 0;           // 0: hardware concurrency

  // Chat completions endpoint; empty means replies must come from the cache.
  std::string llm_base_url;
  std::string llm_api_key_env = "OPENAI_API_KEY";
  LlmConfig llm;
  bool pairwise_ablation = false;

  // Sentence embedding service; empty means sentences are looked up in the
  // embedding file verbatim.
  std::string embed_base_url;
  std::string embed_path = "/embeddings";
  std::string embed_model;

  Family report_family = Family::P0;
  double bin_width = 0.02;
  int top_n = 5;

  void validate() const;  // k, top_m, families, filters, bin width
};

// Parses a JSON config; relative paths are resolved against `base_dir`.
PipelineConfig parse_config(std::string_view contents, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

std::vector<Family> parse_families(std::string_view csv);
std::vector<std::string> parse_filters(std::string_view csv);

class Pipeline {
 public:
  // Transports default to HTTP clients for the configured URLs; tests inject mocks.
  explicit Pipeline(PipelineConfig config, std::shared_ptr<Transport> llm_transport = nullptr,
                    std::shared_ptr<Transport> embed_transport = nullptr);
  ~Pipeline();

  void align();
  void signature();
  void psv();
  void scores();
  void eval();
  void stakeholders();
  void report();
  std::size_t cache_purge();

  // align, signature, psv, scores, eval, then report when stakeholder labels exist.
  void run_all(bool with_stakeholders);

  const PipelineConfig& config() const { return config_; }
  std::size_t network_calls() const;
  std::filesystem::path output(const std::string& name) const { return config_.out_dir / name; }

 private:
  LlmClient& llm();

  PipelineConfig config_;
  std::shared_ptr<Transport> llm_transport_;
  std::shared_ptr<Transport> embed_transport_;
  std::unique_ptr<ResponseCache> cache_;
  std::unique_ptr<LlmClient> client_;
  std::atomic<std::size_t> embed_calls_{0};
};

}  // namespace psv
