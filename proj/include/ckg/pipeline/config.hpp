#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ckg/corpus/io.hpp"
#include "ckg/encoder/encoder.hpp"
#include "ckg/iupredict/classifier.hpp"
#include "ckg/iupredict/heuristics.hpp"
#include "ckg/metrics/metrics.hpp"
#include "ckg/phrasecrf/model.hpp"
#include "ckg/sentcls/model.hpp"
#include "ckg/tripletform/classifiers.hpp"
#include "ckg/tripletform/rules.hpp"

namespace ckg::pipeline {

struct Paths {
  std::filesystem::path corpus_root;
  std::filesystem::path model_dir = "models";
  std::filesystem::path output_dir = "out";
};

struct PipelineConfig {
  std::uint64_t seed = 13;
  metrics::Phase phase = metrics::Phase::EndToEnd;
  Paths paths;

  encoder::EncoderConfig encoder;

  sentcls::SentClassifierConfig sentence_classifier;
  sentcls::SentTrainConfig sentence_train;

  phrasecrf::PhraseExtractorConfig phrase_extractor;
  phrasecrf::PhraseTrainConfig phrase_train;

  iupredict::IuClassifierConfig iu_classifier;
  iupredict::IuTrainConfig iu_train;

  tripletform::PredicateClassifierConfig predicate_classifier;
  tripletform::PredicateTrainConfig predicate_train;

  tripletform::TripletClassifierConfig triplet_classifier;
  tripletform::TripletTrainConfig triplet_train;

  iupredict::HeuristicsConfig heuristics;
  tripletform::RulesConfig rules;
  corpus::IoConfig io;

  static PipelineConfig from_file(const std::filesystem::path& file);
  static PipelineConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  std::filesystem::path sentence_model_dir() const { return paths.model_dir / "sentence"; }
  std::filesystem::path phrase_model_dir() const { return paths.model_dir / "phrase"; }
  std::filesystem::path iu_model_dir() const { return paths.model_dir / "iu"; }
  std::filesystem::path predicate_model_dir() const { return paths.model_dir / "predicate"; }
  std::filesystem::path triplet_model_dir() const { return paths.model_dir / "triplet"; }
};

}  // namespace ckg::pipeline
