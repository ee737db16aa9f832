// psv: command-line driver for the stance-vector pipeline.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <iostream>

#include "psv/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string families;
  std::string predictor;
  std::string filters;
  std::string cache_dir;
  std::string llm_url;
  int k = 0;
  std::size_t threads = 0;
  bool verbose = false;
  bool quiet = false;
};

psv::PipelineConfig build_config(const Overrides& o) {
  psv::PipelineConfig cfg = o.config.empty() ? psv::PipelineConfig{} : psv::load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.families.empty()) cfg.families = psv::parse_families(o.families);
  if (!o.predictor.empty()) cfg.predictor = psv::parse_predictor(o.predictor);
  if (!o.filters.empty()) cfg.filters = psv::parse_filters(o.filters);
  if (!o.cache_dir.empty()) cfg.cache_dir = o.cache_dir;
  if (!o.llm_url.empty()) cfg.llm_base_url = o.llm_url;
  if (o.k != 0) cfg.k = o.k;
  if (o.threads != 0) cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Perspectivized stance vectors for debate arguments"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON pipeline config")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--families", o.families, "aggregation families, e.g. S0,P0");
  app.add_option("--k", o.k, "concepts per stance in the signature")->check(CLI::PositiveNumber);
  app.add_option("--predictor", o.predictor, "baseline | llm_zero | llm_few");
  app.add_option("--filters", o.filters, "signature filters: hypernym,relevance or none");
  app.add_option("--cache-dir", o.cache_dir, "LLM response cache directory");
  app.add_option("--llm-url", o.llm_url, "chat completions base URL, e.g. https://api.openai.com/v1");
  app.add_option("--threads", o.threads, "worker threads");
  app.add_flag("-v,--verbose", o.verbose, "debug logging");
  app.add_flag("-q,--quiet", o.quiet, "warnings and errors only");

  std::string stage;
  for (auto [name, help] : {std::pair{"align", "align arguments to graph concepts"},
                            std::pair{"signature", "select topic signatures"},
                            std::pair{"psv", "predict perspectivized stance vectors"},
                            std::pair{"scores", "aggregate pairwise acceptability scores"},
                            std::pair{"eval", "evaluate scores against annotations"},
                            std::pair{"stakeholders", "assign stakeholder groups with the LLM"},
                            std::pair{"report", "stakeholder matrices, top perspectives, plot data"},
                            std::pair{"cache-purge", "delete cached LLM replies"},
                            std::pair{"all", "align, signature, psv, scores, eval, report"}}) {
    app.add_subcommand(name, help)->callback([&stage, name = std::string(name)] { stage = name; });
  }
  bool with_stakeholders = false;
  app.get_subcommand("all")->add_flag("--stakeholders", with_stakeholders, "also run the stakeholders stage");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(o.verbose ? spdlog::level::debug : o.quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    psv::Pipeline p(build_config(o));
    if (stage == "align") p.align();
    else if (stage == "signature") p.signature();
    else if (stage == "psv") p.psv();
    else if (stage == "scores") p.scores();
    else if (stage == "eval") p.eval();
    else if (stage == "stakeholders") p.stakeholders();
    else if (stage == "report") p.report();
    else if (stage == "cache-purge") std::cout << p.cache_purge() << " entries removed\n";
    else if (stage == "all") p.run_all(with_stakeholders);
    spdlog::debug("network calls: {}", p.network_calls());
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
