#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "ckg/corpus/types.hpp"
#include "ckg/models/text_classifier.hpp"
#include "ckg/nn/train_log.hpp"

namespace ckg::tripletform {

struct PredicateClassifierConfig {
  std::size_t max_tokens = 25;
  std::size_t recurrent_layers = 2;
  std::size_t recurrent_hidden = 400;
  std::vector<std::size_t> linear_sizes{800, 400, 100};
  double dropout = 0.1;
};

struct PredicateTrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 2e-5;
  std::size_t epochs = 4;
  double weight_decay = 0.01;
  std::uint64_t seed = 13;
};

// Binary relational-phrase classifier. A training phrase is a predicate iff
// its text occurs as the predicate of any gold triplet in its document.
class PredicateModel {
 public:
  PredicateModel(encoder::Encoder enc, PredicateClassifierConfig cfg, std::uint64_t seed);

  nn::TrainLog train(const std::vector<corpus::Document>& docs, const PredicateTrainConfig& tcfg);
  std::vector<bool> predict(const std::vector<corpus::PhraseSpan>& phrases) const;
  bool predict_one(const std::string& phrase_text) const;

  void save(const std::filesystem::path& dir) const;
  static PredicateModel load(const std::filesystem::path& dir);

 private:
  explicit PredicateModel(models::TextClassifierNet net) : net_(std::move(net)) {}
  models::TextClassifierNet net_;
};

// The eight units the triplet classifier can assign (all except
// ResearchProblem, Code, Baselines, AblationAnalysis).
const std::vector<corpus::InfoUnitLabel>& triplet_units();

struct TripletClassifierConfig {
  std::size_t max_tokens = 50;
  std::size_t recurrent_layers = 2;
  std::size_t recurrent_hidden = 400;
  std::vector<std::size_t> linear_sizes{800, 400, 100};
  double dropout = 0.2;
};

struct TripletTrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 2e-5;
  std::size_t epochs = 2;
  double weight_decay = 0.01;
  std::uint64_t seed = 13;
};

class TripletModel {
 public:
  TripletModel(encoder::Encoder enc, TripletClassifierConfig cfg, std::uint64_t seed);

  nn::TrainLog train(const std::vector<corpus::Document>& docs, const TripletTrainConfig& tcfg);
  // Softmax scores over triplet_units(), input is "subject predicate object".
  std::map<corpus::InfoUnitLabel, double> scores(const corpus::Triplet& t) const;

  void save(const std::filesystem::path& dir) const;
  static TripletModel load(const std::filesystem::path& dir);

 private:
  explicit TripletModel(models::TextClassifierNet net) : net_(std::move(net)) {}
  models::TextClassifierNet net_;
};

// Assigns each triplet the argmax unit among the predicted information units
// restricted to the classifier's eight classes; when the intersection is
// empty, the highest-scoring predicted unit is used instead.
std::vector<corpus::Triplet> classify_triplets(
    const TripletModel& model, const std::vector<corpus::Triplet>& triplets,
    const std::map<corpus::InfoUnitLabel, double>& predicted_units);

}  // namespace ckg::tripletform
