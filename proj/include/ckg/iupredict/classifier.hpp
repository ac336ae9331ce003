#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <vector>

#include "ckg/corpus/types.hpp"
#include "ckg/models/text_classifier.hpp"
#include "ckg/nn/train_log.hpp"

namespace ckg::iupredict {

// The ten units handled by the multi-label classifier; ResearchProblem and
// Code are heuristic-only.
const std::vector<corpus::InfoUnitLabel>& classifier_units();

struct IuClassifierConfig {
  double sigmoid_threshold = 0.5;
  std::size_t max_tokens = 512;
  std::size_t recurrent_layers = 2;
  std::size_t recurrent_hidden = 400;
  std::vector<std::size_t> linear_sizes{800, 400, 100};
  double dropout = 0.2;
};

struct IuTrainConfig {
  std::size_t batch_size = 4;
  double learning_rate = 2e-5;
  std::size_t epochs = 16;
  double weight_decay = 0.01;
  std::uint64_t seed = 13;
};

// Phrases sorted by occurrence order, joined with single spaces.
std::string concat_document_phrases(const std::vector<corpus::PhraseSpan>& phrases);

struct IuPrediction {
  std::map<corpus::InfoUnitLabel, double> scores;  // sigmoid scores, all 10 units
  std::vector<corpus::InfoUnitLabel> predicted;    // thresholded; top-2 fallback when empty
};

// Multi-label document classifier over the concatenated phrase string.
class IuModel {
 public:
  IuModel(encoder::Encoder enc, IuClassifierConfig cfg, std::uint64_t seed);

  nn::TrainLog train(const std::vector<corpus::Document>& docs, const IuTrainConfig& tcfg);
  IuPrediction predict(const std::string& concatenated_phrases) const;

  void save(const std::filesystem::path& dir) const;
  static IuModel load(const std::filesystem::path& dir);
  const IuClassifierConfig& config() const { return cfg_; }

  // Threshold + fallback rule, exposed for tests.
  static std::vector<corpus::InfoUnitLabel> apply_threshold(
      const std::map<corpus::InfoUnitLabel, double>& scores, double threshold);

 private:
  IuModel(models::TextClassifierNet net, IuClassifierConfig cfg);

  IuClassifierConfig cfg_;
  models::TextClassifierNet net_;
};

}  // namespace ckg::iupredict
