#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ckg/metrics/metrics.hpp"
#include "ckg/pipeline/config.hpp"

namespace ckg::pipeline {

// Per-stage training entry points; each writes a self-contained model
// directory plus a train-log.jsonl.
void train_sentence_stage(const PipelineConfig& cfg);
void train_phrase_stage(const PipelineConfig& cfg);
void train_unit_stage(const PipelineConfig& cfg);  // IU + predicate + triplet models

// Runs the configured phase over one split and writes submission-format
// predictions; returns the output directory. Missing model checkpoints
// raise errors naming the stage to train.
std::filesystem::path run_pipeline(const PipelineConfig& cfg, corpus::Split split);

// Scores a prediction directory against the gold corpus; the report is
// printed by the caller and also written to report.txt / report.json inside
// the prediction directory.
metrics::EvalReport evaluate_command(const std::filesystem::path& pred_dir,
                                     const std::filesystem::path& corpus_root,
                                     corpus::Split split, metrics::Phase phase,
                                     const corpus::IoConfig& io = {});

// Sub-task C inference over one document, exposed for tests.
struct StageCModels;
corpus::TripletMap form_document_triplets(const corpus::Document& doc,
                                          const std::vector<corpus::PhraseSpan>& phrases,
                                          const std::vector<int>& sentence_ids,
                                          const StageCModels& models, const PipelineConfig& cfg);

struct StageCModels {
  const iupredict::IuModel* iu = nullptr;
  const tripletform::PredicateModel* predicate = nullptr;
  const tripletform::TripletModel* triplet = nullptr;
};

}  // namespace ckg::pipeline
