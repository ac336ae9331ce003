#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ckg/encoder/encoder.hpp"
#include "ckg/nn/layers.hpp"

namespace ckg::models {

// Encoder token states -> stacked BiLSTM -> linear stack -> K logits.
// Shared by the information-unit, predicate and triplet classifiers.
struct TextNetConfig {
  std::size_t recurrent_layers = 2;
  std::size_t recurrent_hidden = 400;
  std::vector<std::size_t> linear_sizes{800, 400, 100};
  double dropout = 0.1;
  std::size_t outputs = 2;
};

class TextClassifierNet {
 public:
  TextClassifierNet(encoder::Encoder enc, TextNetConfig cfg, std::uint64_t seed);

  ag::NodeId logits(ag::Graph& g, const std::vector<std::string>& words, bool training,
                    std::mt19937_64& rng) const;
  std::vector<double> scores(const std::vector<std::string>& words) const;

  std::vector<ag::Parameter*> trainable_params();
  const TextNetConfig& config() const { return cfg_; }
  const encoder::Encoder& encoder() const { return encoder_; }

  void save(const std::filesystem::path& dir) const;
  static TextClassifierNet load(const std::filesystem::path& dir);

 private:
  TextNetConfig cfg_;
  encoder::Encoder encoder_;
  std::shared_ptr<nn::ParamStore> head_;
  std::optional<nn::BiLstmStack> bilstm_;
  std::optional<nn::MlpHead> mlp_;
};

std::vector<std::string> split_words(const std::string& text);

}  // namespace ckg::models
