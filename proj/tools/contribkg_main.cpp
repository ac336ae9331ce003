// Command-line front end: train the three pipeline stages, run predictions
// in any evaluation phase, score prediction directories and inspect corpora.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ckg/corpus/stats.hpp"
#include "ckg/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using ckg::pipeline::PipelineConfig;

namespace {

struct CommonOpts {
  std::string config_file;
  std::int64_t seed = -1;
  std::string phase;
};

PipelineConfig load_config(const CommonOpts& opts) {
  PipelineConfig cfg = opts.config_file.empty() ? PipelineConfig{}
                                                : PipelineConfig::from_file(opts.config_file);
  if (opts.seed >= 0) {
    nlohmann::json j = cfg.to_json();
    j["seed"] = opts.seed;
    cfg = PipelineConfig::from_json(j);
  }
  if (!opts.phase.empty()) cfg.phase = ckg::metrics::phase_from_name(opts.phase);
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_phase = false) {
  cmd->add_option("--config", opts.config_file, "pipeline config file (JSON)");
  cmd->add_option("--seed", opts.seed, "override the config seed");
  if (with_phase)
    cmd->add_option("--phase", opts.phase, "end-to-end | gold-a | gold-ab");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contribution knowledge-graph extraction pipeline"};
  app.require_subcommand(1);

  CommonOpts train_a_opts, train_b_opts, train_c_opts, predict_opts, eval_opts;

  CLI::App* train_a = app.add_subcommand("train-a", "train the contribution-sentence classifier");
  add_common(train_a, train_a_opts);

  CLI::App* train_b = app.add_subcommand("train-b", "train the phrase extractor");
  add_common(train_b, train_b_opts);
  std::string variant;
  train_b->add_option("--variant", variant,
                      "recurrent-crf | encoder-crf | encoder-recurrent-crf");

  CLI::App* train_c = app.add_subcommand("train-c", "train the unit/predicate/triplet models");
  add_common(train_c, train_c_opts);

  CLI::App* predict = app.add_subcommand("predict", "run the pipeline over a split");
  add_common(predict, predict_opts, /*with_phase=*/true);
  std::string predict_split = "dev";
  predict->add_option("--split", predict_split, "train | dev | test");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score a prediction directory");
  add_common(evaluate, eval_opts, /*with_phase=*/true);
  std::string pred_dir, eval_corpus, eval_split = "dev";
  evaluate->add_option("--pred", pred_dir, "prediction directory")->required();
  evaluate->add_option("--corpus", eval_corpus, "gold corpus root (defaults to config path)");
  evaluate->add_option("--split", eval_split, "train | dev | test");

  CLI::App* stats = app.add_subcommand("stats", "print dataset statistics for a split");
  std::string stats_corpus, stats_split = "train";
  stats->add_option("--corpus", stats_corpus, "corpus root")->required();
  stats->add_option("--split", stats_split, "train | dev | test");

  CLI::App* make_ckpt = app.add_subcommand("make-checkpoint",
                                           "write a tiny randomly initialized encoder checkpoint");
  std::string ckpt_out;
  std::uint64_t ckpt_seed = 7;
  std::size_t ckpt_hidden = 32, ckpt_layers = 2, ckpt_heads = 2, ckpt_ff = 64, ckpt_pos = 512;
  make_ckpt->add_option("--out", ckpt_out, "checkpoint directory")->required();
  make_ckpt->add_option("--seed", ckpt_seed, "initialization seed");
  make_ckpt->add_option("--hidden", ckpt_hidden, "hidden size");
  make_ckpt->add_option("--layers", ckpt_layers, "encoder layers");
  make_ckpt->add_option("--heads", ckpt_heads, "attention heads");
  make_ckpt->add_option("--intermediate", ckpt_ff, "feed-forward size");
  make_ckpt->add_option("--max-position", ckpt_pos, "maximum sequence length");

  CLI::App* init_config = app.add_subcommand("init-config", "write a config with all defaults");
  std::string config_out = "config.json";
  init_config->add_option("--out", config_out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_a->parsed()) {
      ckg::pipeline::train_sentence_stage(load_config(train_a_opts));
      std::cout << "sentence classifier saved\n";
    } else if (train_b->parsed()) {
      PipelineConfig cfg = load_config(train_b_opts);
      if (!variant.empty()) cfg.phrase_extractor.variant = ckg::phrasecrf::variant_from_name(variant);
      ckg::pipeline::train_phrase_stage(cfg);
      std::cout << "phrase extractor saved\n";
    } else if (train_c->parsed()) {
      ckg::pipeline::train_unit_stage(load_config(train_c_opts));
      std::cout << "unit, predicate and triplet models saved\n";
    } else if (predict->parsed()) {
      PipelineConfig cfg = load_config(predict_opts);
      fs::path out = ckg::pipeline::run_pipeline(cfg, ckg::corpus::split_from_string(predict_split));
      std::cout << "predictions written to " << out.string() << "\n";
    } else if (evaluate->parsed()) {
      PipelineConfig cfg = load_config(eval_opts);
      const fs::path corpus_root =
          eval_corpus.empty() ? cfg.paths.corpus_root : fs::path(eval_corpus);
      ckg::metrics::EvalReport report = ckg::pipeline::evaluate_command(
          pred_dir, corpus_root, ckg::corpus::split_from_string(eval_split), cfg.phase, cfg.io);
      std::cout << ckg::metrics::format_report(report);
    } else if (stats->parsed()) {
      const auto docs = ckg::corpus::load_split(stats_corpus,
                                                ckg::corpus::split_from_string(stats_split));
      std::cout << ckg::corpus::format_statistics(ckg::corpus::corpus_statistics(docs));
    } else if (make_ckpt->parsed()) {
      ckg::encoder::Encoder::write_tiny_checkpoint(ckpt_out, ckpt_seed, ckpt_hidden, ckpt_layers,
                                                   ckpt_heads, ckpt_ff, ckpt_pos);
      std::cout << "checkpoint written to " << ckpt_out << "\n";
    } else if (init_config->parsed()) {
      std::ofstream os(config_out);
      os << PipelineConfig{}.to_json().dump(2) << "\n";
      std::cout << "config written to " << config_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
