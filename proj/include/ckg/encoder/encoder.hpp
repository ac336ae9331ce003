#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ckg/ag/graph.hpp"
#include "ckg/corpus/types.hpp"
#include "ckg/encoder/wordpiece.hpp"
#include "ckg/nn/param_store.hpp"
#include "ckg/nn/transformer.hpp"

namespace ckg::encoder {

// Local checkpoint cache directory; checkpoint_id resolves against it unless
// it is already a path to a checkpoint directory.
inline constexpr const char* kCheckpointDirEnv = "CONTRIBKG_CHECKPOINTS";

struct EncoderConfig {
  std::string checkpoint_id;
  std::size_t max_token_length = 100;  // sub-token budget for word retention
  bool fine_tune = true;
};

struct TokenEncoding {
  num::Matrix vectors;  // one row per retained word (first sub-token state)
  std::size_t n_words = 0;
  // Indices into Sentence::tokens of the retained (non-truncated) words.
  std::vector<std::size_t> retained_word_indices;
  std::size_t dropped_words = 0;
};

// Contextual encoder over a sub-word transformer checkpoint. A checkpoint
// directory holds config.json, vocab.txt and weights.bin.
class Encoder {
 public:
  static std::filesystem::path resolve_checkpoint(const std::string& checkpoint_id);
  static Encoder load(const EncoderConfig& cfg);
  static Encoder load_from_dir(const std::filesystem::path& dir, const EncoderConfig& cfg);

  // Writes a randomly initialized checkpoint with a character-level
  // vocabulary; used for tests and desk-scale runs.
  static void write_tiny_checkpoint(const std::filesystem::path& dir, std::uint64_t seed,
                                    std::size_t hidden = 32, std::size_t layers = 2,
                                    std::size_t heads = 2, std::size_t intermediate = 64,
                                    std::size_t max_position = 512);

  TokenEncoding encode_tokens(const corpus::Sentence& sentence) const;
  std::vector<double> encode_sentence(const corpus::Sentence& sentence) const;

  // Graph-building for training. The returned word_vectors node has one row
  // per retained word; cls_vector is 1 x d.
  struct GraphEncoding {
    ag::NodeId word_vectors;
    ag::NodeId cls_vector;
    std::vector<std::size_t> retained_word_indices;
    std::size_t dropped_words = 0;
  };
  GraphEncoding build(ag::Graph& g, const std::vector<std::string>& words, bool training,
                      std::mt19937_64& rng) const;

  // Tokenization plan for one word sequence under the sub-token budget.
  struct Plan {
    std::vector<int> piece_ids;                    // [CLS] pieces... [SEP]
    std::vector<std::size_t> first_piece_rows;     // row of each retained word's first piece
    std::vector<std::size_t> retained_word_indices;
    std::size_t dropped_words = 0;
  };
  Plan plan(const std::vector<std::string>& words) const;
  // Budget-free variant capped only by the model's max_position (used for
  // long concatenated-phrase inputs where the cap is the caller's).
  Plan plan_with_budget(const std::vector<std::string>& words, std::size_t budget) const;

  std::size_t hidden_size() const { return transformer_->config().hidden_size; }
  const EncoderConfig& config() const { return cfg_; }
  const WordPieceVocab& vocab() const { return vocab_; }
  nn::ParamStore& params() const { return *store_; }
  bool fine_tune() const { return cfg_.fine_tune; }

  void save_checkpoint(const std::filesystem::path& dir) const;

 private:
  Encoder() = default;

  EncoderConfig cfg_;
  WordPieceVocab vocab_;
  nn::TransformerConfig tcfg_;
  // Shared so copies of an Encoder refer to the same weights; mutation is
  // confined to training (single-writer).
  std::shared_ptr<nn::ParamStore> store_;
  std::shared_ptr<nn::TransformerEncoder> transformer_;
};

}  // namespace ckg::encoder
