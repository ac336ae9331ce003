#pragma once

#include <random>
#include <vector>

#include "ckg/ag/graph.hpp"
#include "ckg/nn/layers.hpp"
#include "ckg/nn/param_store.hpp"

namespace ckg::nn {

struct TransformerConfig {
  std::size_t hidden_size = 768;
  std::size_t num_layers = 12;
  std::size_t num_heads = 12;
  std::size_t intermediate_size = 3072;
  std::size_t vocab_size = 0;
  std::size_t max_position = 512;
  double hidden_dropout = 0.1;
  double attention_dropout = 0.1;
};

// Post-norm transformer encoder over one sub-token sequence:
// embeddings (token + position + segment, layer-normed), then
// self-attention and feed-forward blocks with residual connections.
class TransformerEncoder {
 public:
  TransformerEncoder(ParamStore& store, TransformerConfig cfg, std::mt19937_64& rng);

  // token_ids must include any special tokens; returns the n x hidden final
  // layer. Sequences longer than max_position are rejected.
  ag::NodeId forward(ag::Graph& g, const std::vector<int>& token_ids, bool training,
                     std::mt19937_64& rng) const;

  const TransformerConfig& config() const { return cfg_; }

 private:
  struct Layer {
    Linear query, key, value, attn_out;
    ag::Parameter* attn_ln_gamma;
    ag::Parameter* attn_ln_beta;
    Linear ffn_in, ffn_out;
    ag::Parameter* ffn_ln_gamma;
    ag::Parameter* ffn_ln_beta;
  };

  TransformerConfig cfg_;
  ag::Parameter* token_embeddings_;
  ag::Parameter* position_embeddings_;
  ag::Parameter* segment_embeddings_;
  ag::Parameter* embed_ln_gamma_;
  ag::Parameter* embed_ln_beta_;
  std::vector<Layer> layers_;
};

}  // namespace ckg::nn
