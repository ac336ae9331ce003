#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ckg/corpus/types.hpp"
#include "ckg/encoder/encoder.hpp"
#include "ckg/nn/layers.hpp"
#include "ckg/nn/train_log.hpp"
#include "ckg/phrasecrf/biluo.hpp"

namespace ckg::phrasecrf {

// Emission/transition scoring surface of the sequence labeler. The
// transition matrix carries the two virtual start/stop states.
struct CrfParams {
  num::Matrix transitions{kTagCount + 2, kTagCount + 2};
  double l2_weight = 0.0;
};

double crf_sequence_score(const num::Matrix& emissions, const CrfParams& params,
                          const TagSequence& tags);
double crf_log_prob(const num::Matrix& emissions, const CrfParams& params,
                    const TagSequence& tags);
// -(1/M) sum log P(y|s) + (l2_weight/2) * ||transitions||^2
double crf_training_loss(const std::vector<std::pair<num::Matrix, TagSequence>>& batch,
                         const CrfParams& params);
// Same value; also fills per-instance emission gradients and the shared
// transition gradient.
double crf_training_loss_with_grads(const std::vector<std::pair<num::Matrix, TagSequence>>& batch,
                                    const CrfParams& params,
                                    std::vector<num::Matrix>& d_emissions,
                                    num::Matrix& d_transitions);
TagSequence viterbi_decode(const num::Matrix& emissions, const CrfParams& params);

// Batched decode used by the extraction path; parallel across sequences,
// with a serial reference kept for testing and benchmarking.
std::vector<TagSequence> viterbi_decode_batch(const std::vector<num::Matrix>& emissions,
                                              const CrfParams& params);
std::vector<TagSequence> viterbi_decode_batch_serial(const std::vector<num::Matrix>& emissions,
                                                     const CrfParams& params);

struct PhraseExtractorConfig {
  enum class Variant { RecurrentCrf, EncoderCrf, EncoderRecurrentCrf };
  Variant variant = Variant::EncoderRecurrentCrf;
  std::size_t recurrent_layers = 1;
  std::size_t recurrent_hidden = 200;
  double dropout = 0.0;
  std::size_t word_embedding_dim = 100;  // RecurrentCrf only
  std::size_t max_token_length = 100;    // word cap for RecurrentCrf
  double l2_weight = 0.0;
  bool constrained_decode = true;
};

std::string variant_name(PhraseExtractorConfig::Variant v);
PhraseExtractorConfig::Variant variant_from_name(const std::string& name);

struct PhraseTrainConfig {
  std::size_t batch_size = 1;
  double learning_rate = 2e-5;
  std::size_t epochs = 4;
  double weight_decay = 0.01;
  std::uint64_t seed = 13;
};

// Word-identity vocabulary for the encoder-free variant.
class WordVocab {
 public:
  static WordVocab build(const std::vector<corpus::Document>& docs);
  int id(const std::string& word) const;  // 0 is the unknown id
  std::size_t size() const { return words_.size() + 1; }
  void save(const std::filesystem::path& file) const;
  static WordVocab load(const std::filesystem::path& file);

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> word_to_id_;
};

// Sequence labeler: token representations -> (optional BiLSTM) -> linear
// emissions -> CRF; decodes BILUO tags into phrase spans.
class PhraseModel {
 public:
  PhraseModel(std::optional<encoder::Encoder> enc, PhraseExtractorConfig cfg, std::uint64_t seed);

  nn::TrainLog train(const std::vector<corpus::Document>& docs, const PhraseTrainConfig& tcfg);

  std::vector<corpus::PhraseSpan> extract(const corpus::Document& doc,
                                          const std::vector<int>& sentence_ids) const;

  void save(const std::filesystem::path& dir) const;
  static PhraseModel load(const std::filesystem::path& dir,
                          std::optional<encoder::EncoderConfig> enc_override = {});

  const PhraseExtractorConfig& config() const { return cfg_; }
  CrfParams crf_params() const;

 private:
  void ensure_modules();
  ag::NodeId emissions_for_words(ag::Graph& g, const std::vector<std::string>& words,
                                 std::vector<std::size_t>& retained, bool training,
                                 std::mt19937_64& rng) const;

  PhraseExtractorConfig cfg_;
  std::optional<encoder::Encoder> encoder_;
  std::optional<WordVocab> word_vocab_;
  std::shared_ptr<nn::ParamStore> head_;
  std::optional<nn::BiLstmStack> bilstm_;
  std::optional<nn::Linear> emission_layer_;
  ag::Parameter* transitions_ = nullptr;
  ag::Parameter* word_embeddings_ = nullptr;
  std::uint64_t seed_ = 13;
  mutable std::mt19937_64 init_rng_;
};

}  // namespace ckg::phrasecrf
