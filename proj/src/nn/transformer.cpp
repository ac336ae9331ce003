#include "ckg/nn/transformer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ckg::nn {

TransformerEncoder::TransformerEncoder(ParamStore& store, TransformerConfig cfg,
                                       std::mt19937_64& rng)
    : cfg_(cfg) {
  if (cfg_.hidden_size % cfg_.num_heads != 0)
    throw std::invalid_argument("transformer: hidden_size must be divisible by num_heads");
  if (cfg_.vocab_size == 0) throw std::invalid_argument("transformer: vocab_size not set");

  const double std = 0.02;
  token_embeddings_ = &store.get_or_create("embeddings.token", cfg_.vocab_size, cfg_.hidden_size,
                                           normal_init(rng, std));
  position_embeddings_ = &store.get_or_create("embeddings.position", cfg_.max_position,
                                              cfg_.hidden_size, normal_init(rng, std));
  segment_embeddings_ =
      &store.get_or_create("embeddings.segment", 2, cfg_.hidden_size, normal_init(rng, std));
  embed_ln_gamma_ =
      &store.get_or_create("embeddings.ln.gamma", 1, cfg_.hidden_size, const_init(1.0));
  embed_ln_beta_ = &store.get_or_create("embeddings.ln.beta", 1, cfg_.hidden_size, zeros_init());

  for (std::size_t l = 0; l < cfg_.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l);
    layers_.push_back(Layer{
        Linear(store, p + ".attn.query", cfg_.hidden_size, cfg_.hidden_size, rng),
        Linear(store, p + ".attn.key", cfg_.hidden_size, cfg_.hidden_size, rng),
        Linear(store, p + ".attn.value", cfg_.hidden_size, cfg_.hidden_size, rng),
        Linear(store, p + ".attn.output", cfg_.hidden_size, cfg_.hidden_size, rng),
        &store.get_or_create(p + ".attn.ln.gamma", 1, cfg_.hidden_size, const_init(1.0)),
        &store.get_or_create(p + ".attn.ln.beta", 1, cfg_.hidden_size, zeros_init()),
        Linear(store, p + ".ffn.input", cfg_.hidden_size, cfg_.intermediate_size, rng),
        Linear(store, p + ".ffn.output", cfg_.intermediate_size, cfg_.hidden_size, rng),
        &store.get_or_create(p + ".ffn.ln.gamma", 1, cfg_.hidden_size, const_init(1.0)),
        &store.get_or_create(p + ".ffn.ln.beta", 1, cfg_.hidden_size, zeros_init()),
    });
  }
}

ag::NodeId TransformerEncoder::forward(ag::Graph& g, const std::vector<int>& token_ids,
                                       bool training, std::mt19937_64& rng) const {
  const std::size_t n = token_ids.size();
  if (n == 0) throw std::invalid_argument("transformer: empty token sequence");
  if (n > cfg_.max_position)
    throw std::invalid_argument("transformer: sequence length " + std::to_string(n) +
                                " exceeds max_position " + std::to_string(cfg_.max_position));

  ag::NodeId tok = g.gather_rows(g.param(*token_embeddings_), token_ids);
  ag::NodeId pos = g.slice_rows(g.param(*position_embeddings_), 0, n);
  ag::NodeId seg = g.gather_rows(g.param(*segment_embeddings_), std::vector<int>(n, 0));
  ag::NodeId x = g.add(g.add(tok, pos), seg);
  x = g.layer_norm_rows(x, g.param(*embed_ln_gamma_), g.param(*embed_ln_beta_));
  x = g.dropout(x, cfg_.hidden_dropout, rng, training);

  const std::size_t head_dim = cfg_.hidden_size / cfg_.num_heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  for (const Layer& layer : layers_) {
    ag::NodeId q = layer.query.forward(g, x);
    ag::NodeId k = layer.key.forward(g, x);
    ag::NodeId v = layer.value.forward(g, x);

    std::vector<ag::NodeId> heads;
    heads.reserve(cfg_.num_heads);
    for (std::size_t h = 0; h < cfg_.num_heads; ++h) {
      const std::size_t c0 = h * head_dim, c1 = (h + 1) * head_dim;
      ag::NodeId qh = g.slice_cols(q, c0, c1);
      ag::NodeId kh = g.slice_cols(k, c0, c1);
      ag::NodeId vh = g.slice_cols(v, c0, c1);
      ag::NodeId scores = g.softmax_rows(g.scale(g.matmul_nt(qh, kh), scale));
      scores = g.dropout(scores, cfg_.attention_dropout, rng, training);
      heads.push_back(g.matmul(scores, vh));
    }
    ag::NodeId context = cfg_.num_heads == 1 ? heads[0] : g.concat_cols(heads);
    ag::NodeId attn = layer.attn_out.forward(g, context);
    attn = g.dropout(attn, cfg_.hidden_dropout, rng, training);
    x = g.layer_norm_rows(g.add(x, attn), g.param(*layer.attn_ln_gamma),
                          g.param(*layer.attn_ln_beta));

    ag::NodeId ffn = layer.ffn_out.forward(g, g.gelu(layer.ffn_in.forward(g, x)));
    ffn = g.dropout(ffn, cfg_.hidden_dropout, rng, training);
    x = g.layer_norm_rows(g.add(x, ffn), g.param(*layer.ffn_ln_gamma),
                          g.param(*layer.ffn_ln_beta));
  }
  return x;
}

}  // namespace ckg::nn
