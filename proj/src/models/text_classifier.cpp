#include "ckg/models/text_classifier.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ckg::models {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_words(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> words;
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

TextClassifierNet::TextClassifierNet(encoder::Encoder enc, TextNetConfig cfg, std::uint64_t seed)
    : cfg_(cfg), encoder_(std::move(enc)), head_(std::make_shared<nn::ParamStore>()) {
  std::mt19937_64 rng(seed);
  bilstm_.emplace(*head_, "bilstm", encoder_.hidden_size(), cfg_.recurrent_hidden,
                  cfg_.recurrent_layers, cfg_.dropout, rng);
  mlp_.emplace(*head_, "mlp", bilstm_->out_dim(), cfg_.linear_sizes, cfg_.outputs, cfg_.dropout,
               rng);
}

ag::NodeId TextClassifierNet::logits(ag::Graph& g, const std::vector<std::string>& words,
                                     bool training, std::mt19937_64& rng) const {
  ag::NodeId tokens;
  if (words.empty()) {
    // Degenerate input ([CLS][SEP] only): classify from the [CLS] state.
    encoder::Encoder::GraphEncoding enc = encoder_.build(g, {"."}, training, rng);
    tokens = enc.cls_vector;
  } else {
    encoder::Encoder::GraphEncoding enc = encoder_.build(g, words, training, rng);
    tokens = g.value(enc.word_vectors).rows() > 0 ? enc.word_vectors : enc.cls_vector;
  }
  ag::NodeId pooled = bilstm_->forward(g, tokens, training, rng).pooled;
  return mlp_->forward(g, pooled, training, rng);
}

std::vector<double> TextClassifierNet::scores(const std::vector<std::string>& words) const {
  ag::Graph g;
  std::mt19937_64 rng(0);
  ag::NodeId z = logits(g, words, /*training=*/false, rng);
  return g.value(z).flat();
}

std::vector<ag::Parameter*> TextClassifierNet::trainable_params() {
  std::vector<ag::Parameter*> params = head_->trainable();
  if (encoder_.fine_tune())
    for (auto* p : encoder_.params().trainable()) params.push_back(p);
  return params;
}

void TextClassifierNet::save(const fs::path& dir) const {
  fs::create_directories(dir);
  json j = {
      {"recurrent_layers", cfg_.recurrent_layers},
      {"recurrent_hidden", cfg_.recurrent_hidden},
      {"linear_sizes", cfg_.linear_sizes},
      {"dropout", cfg_.dropout},
      {"outputs", cfg_.outputs},
      {"max_token_length", encoder_.config().max_token_length},
  };
  std::ofstream os(dir / "config.json");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  head_->save(dir / "head.bin");
  encoder_.save_checkpoint(dir / "encoder");
}

TextClassifierNet TextClassifierNet::load(const fs::path& dir) {
  std::ifstream is(dir / "config.json");
  if (!is) throw std::runtime_error("classifier checkpoint missing: " + dir.string());
  json j = json::parse(is);
  TextNetConfig cfg;
  cfg.recurrent_layers = j.at("recurrent_layers").get<std::size_t>();
  cfg.recurrent_hidden = j.at("recurrent_hidden").get<std::size_t>();
  cfg.linear_sizes = j.at("linear_sizes").get<std::vector<std::size_t>>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.outputs = j.at("outputs").get<std::size_t>();

  encoder::EncoderConfig ecfg;
  ecfg.checkpoint_id = (dir / "encoder").string();
  ecfg.max_token_length = j.at("max_token_length").get<std::size_t>();
  ecfg.fine_tune = false;
  encoder::Encoder enc = encoder::Encoder::load_from_dir(dir / "encoder", ecfg);

  TextClassifierNet net(std::move(enc), cfg, /*seed=*/13);
  net.head_->load(dir / "head.bin");
  return net;
}

}  // namespace ckg::models
