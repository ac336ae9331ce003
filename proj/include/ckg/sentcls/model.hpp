#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "ckg/corpus/types.hpp"
#include "ckg/encoder/encoder.hpp"
#include "ckg/nn/layers.hpp"
#include "ckg/nn/train_log.hpp"

namespace ckg::sentcls {

struct SentClassifierConfig {
  std::size_t recurrent_layers = 2;
  std::size_t recurrent_hidden = 400;  // per direction
  std::vector<std::size_t> linear_sizes{800, 400, 100};
  double dropout = 0.1;
  enum class Head { Recurrent, Convolutional } head = Head::Recurrent;
  std::vector<std::size_t> conv_kernel_sizes{2, 3, 4};
  std::size_t conv_filters = 100;
};

struct SentTrainConfig {
  std::size_t batch_size = 32;
  double learning_rate = 1e-5;
  std::size_t epochs = 2;
  bool class_weighting = true;
  bool oversample_minority = true;
  double weight_decay = 0.01;
  std::uint64_t seed = 13;
};

using LabeledSentence = std::pair<corpus::Sentence, int>;  // label 1 = contribution

// Duplicates the minority class (sampling with replacement) until both
// classes have equal counts. Already-balanced input is returned unchanged;
// single-class input is an error.
std::vector<LabeledSentence> balance_training_set(const std::vector<LabeledSentence>& examples,
                                                  std::uint64_t seed);

// Inverse-frequency class weights: total / (2 * count_c), computed on the
// original (pre-oversampling) distribution.
std::array<double, 2> class_weights(const std::vector<LabeledSentence>& examples);

// Binary contribution-sentence classifier: encoder token states -> stacked
// BiLSTM (or convolutional head) -> linear stack -> 2 units.
class SentenceModel {
 public:
  SentenceModel(encoder::Encoder enc, SentClassifierConfig cfg, std::uint64_t seed);

  nn::TrainLog train(const std::vector<corpus::Document>& docs, const SentTrainConfig& tcfg);

  // Ascending, duplicate-free indices of positive sentences. Ties between
  // the two output units resolve to the negative class.
  std::vector<int> predict(const corpus::Document& doc) const;
  bool predict_sentence(const corpus::Sentence& sentence) const;
  // Raw output scores (negative, positive), for tests.
  std::array<double, 2> scores(const corpus::Sentence& sentence) const;

  void save(const std::filesystem::path& dir) const;
  static SentenceModel load(const std::filesystem::path& dir);

  const SentClassifierConfig& config() const { return cfg_; }

 private:
  ag::NodeId logits_for_sentence(ag::Graph& g, const corpus::Sentence& sentence, bool training,
                                 std::mt19937_64& rng) const;

  SentClassifierConfig cfg_;
  encoder::Encoder encoder_;
  std::shared_ptr<nn::ParamStore> head_;
  std::optional<nn::BiLstmStack> bilstm_;
  std::optional<nn::ConvPoolHead> conv_;
  std::optional<nn::MlpHead> mlp_;
};

}  // namespace ckg::sentcls
