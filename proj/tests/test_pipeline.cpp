#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ckg/pipeline/pipeline.hpp"
#include "synthetic_corpus.hpp"

namespace fs = std::filesystem;
using namespace ckg;
using pipeline::PipelineConfig;

namespace {

struct Fixture {
  fs::path root;
  PipelineConfig cfg;

  Fixture() {
    root = fs::temp_directory_path() / "ckg_pipeline_fixture";
    // Train once per binary run; re-use across test cases.
    static bool prepared = false;
    const fs::path corpus = root / "corpus";
    const fs::path ckpt = root / "ckpt";
    if (!prepared) {
      fs::remove_all(root);
      testing::write_synthetic_corpus(corpus);
      encoder::Encoder::write_tiny_checkpoint(ckpt, 61, 16, 1, 2, 32, 128);
      prepared = true;
    }
    cfg = testing::tiny_pipeline_config(corpus, ckpt, root / "work");
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config file round-trip preserves every section") {
  Fixture f;
  const fs::path file = f.root / "config.json";
  testing::write_file(file, f.cfg.to_json().dump(2));
  const PipelineConfig loaded = PipelineConfig::from_file(file);
  CHECK(loaded.to_json() == f.cfg.to_json());
  CHECK(loaded.seed == f.cfg.seed);
  CHECK(loaded.iu_classifier.max_tokens == 64);
}

TEST_CASE("missing checkpoints produce actionable stage errors") {
  Fixture f;
  PipelineConfig cfg = f.cfg;
  cfg.paths.model_dir = f.root / "nonexistent-models";
  try {
    pipeline::run_pipeline(cfg, corpus::Split::Train);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("train-a") != std::string::npos);
  }
}

TEST_CASE("full pipeline: train, predict in all phases, evaluate") {
  Fixture f;
  // Stage training (idempotent across cases thanks to the fixture reuse).
  if (!fs::exists(f.cfg.sentence_model_dir() / "config.json"))
    pipeline::train_sentence_stage(f.cfg);
  if (!fs::exists(f.cfg.phrase_model_dir() / "config.json"))
    pipeline::train_phrase_stage(f.cfg);
  if (!fs::exists(f.cfg.iu_model_dir() / "config.json")) pipeline::train_unit_stage(f.cfg);

  CHECK(fs::exists(f.cfg.sentence_model_dir() / "train-log.jsonl"));
  CHECK(fs::exists(f.cfg.paths.model_dir / "calibrated-rules.json"));

  SUBCASE("gold-ab phase uses gold sentences and phrases downstream") {
    PipelineConfig cfg = f.cfg;
    cfg.phase = metrics::Phase::GoldAB;
    const fs::path out = pipeline::run_pipeline(cfg, corpus::Split::Train);

    const auto preds = corpus::parse_predictions(out / "paper01");
    // Phase substitution correctness: stage-B input equals gold exactly.
    CHECK(preds.sentences == std::set<int>{1, 3, 4, 6, 8});
    const auto gold = corpus::load_split(cfg.paths.corpus_root, corpus::Split::Train);
    CHECK(preds.phrases == *gold[0].gold_phrases);

    // Heuristic units fire on the synthetic documents.
    REQUIRE(preds.triplets.count(corpus::InfoUnitLabel::ResearchProblem));
    CHECK(preds.triplets.at(corpus::InfoUnitLabel::ResearchProblem).at(0).object ==
          "entity extraction");
    REQUIRE(preds.triplets.count(corpus::InfoUnitLabel::Code));
    CHECK(preds.triplets.at(corpus::InfoUnitLabel::Code).at(0).object ==
          "https://github.com/a/b");
    // Calibrated fixed strings come from the gold training files.
    CHECK(preds.triplets.at(corpus::InfoUnitLabel::Code).at(0).predicate == "has source code");

    const metrics::EvalReport report = pipeline::evaluate_command(
        out, cfg.paths.corpus_root, corpus::Split::Train, metrics::Phase::GoldAB, cfg.io);
    CHECK(report.sentence.f1 == 1.0);
    CHECK(report.phrase.f1 == 1.0);
    CHECK(report.average_f1 > 0.5);  // units + triplets carry real signal
    CHECK(fs::exists(out / "report.json"));
    CHECK(fs::exists(out / "report.txt"));
  }

  SUBCASE("gold-a phase runs the trained extractor") {
    PipelineConfig cfg = f.cfg;
    cfg.phase = metrics::Phase::GoldA;
    const fs::path out = pipeline::run_pipeline(cfg, corpus::Split::Train);
    const auto preds = corpus::parse_predictions(out / "paper01");
    CHECK(preds.sentences == std::set<int>{1, 3, 4, 6, 8});
    // Submission-format invariants on extracted phrases.
    const auto gold = corpus::load_split(cfg.paths.corpus_root, corpus::Split::Train);
    for (const auto& p : preds.phrases) {
      const auto& s = gold[0].sentence(p.sentence_index);
      CHECK(p.text == s.text.substr(p.start_char, p.end_char - p.start_char));
    }
  }

  SUBCASE("end-to-end phase completes and round-trips") {
    PipelineConfig cfg = f.cfg;
    cfg.phase = metrics::Phase::EndToEnd;
    const fs::path out = pipeline::run_pipeline(cfg, corpus::Split::Train);
    for (const char* id : {"paper01", "paper02"}) {
      CHECK(fs::exists(out / id / "contribution-sentences.txt"));
      CHECK(fs::exists(out / id / "phrases.txt"));
      const auto preds = corpus::parse_predictions(out / id);
      for (int sid : preds.sentences) {
        CHECK(sid >= 1);
        CHECK(sid <= 10);
      }
    }
    const metrics::EvalReport report = pipeline::evaluate_command(
        out, cfg.paths.corpus_root, corpus::Split::Train, metrics::Phase::EndToEnd, cfg.io);
    CHECK(report.average_f1 >= 0.0);
  }

  SUBCASE("inference is deterministic: two runs produce identical bytes") {
    PipelineConfig cfg = f.cfg;
    cfg.phase = metrics::Phase::EndToEnd;
    fs::remove_all(cfg.paths.output_dir / "train-end-to-end");  // drop stale reports
    const fs::path out1 = pipeline::run_pipeline(cfg, corpus::Split::Train);
    const fs::path moved = f.root / "run1-copy";
    fs::remove_all(moved);
    fs::rename(out1, moved);
    const fs::path out2 = pipeline::run_pipeline(cfg, corpus::Split::Train);

    for (auto it = fs::recursive_directory_iterator(moved);
         it != fs::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file()) continue;
      const fs::path rel = fs::relative(it->path(), moved);
      CAPTURE(rel.string());
      CHECK(slurp(it->path()) == slurp(out2 / rel));
    }
  }
}
