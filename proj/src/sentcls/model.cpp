#include "ckg/sentcls/model.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ckg::sentcls {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<LabeledSentence> balance_training_set(const std::vector<LabeledSentence>& examples,
                                                  std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < examples.size(); ++i)
    (examples[i].second == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw corpus::ValidationError("balance_training_set: both classes must be present");
  if (pos.size() == neg.size()) return examples;

  const auto& minority = pos.size() < neg.size() ? pos : neg;
  const std::size_t deficit =
      (pos.size() < neg.size() ? neg.size() : pos.size()) - minority.size();
  std::vector<LabeledSentence> out = examples;
  out.reserve(examples.size() + deficit);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, minority.size() - 1);
  for (std::size_t i = 0; i < deficit; ++i) out.push_back(examples[minority[pick(rng)]]);
  return out;
}

std::array<double, 2> class_weights(const std::vector<LabeledSentence>& examples) {
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& [_, label] : examples) ++counts[label == 1 ? 1 : 0];
  if (counts[0] == 0 || counts[1] == 0)
    throw corpus::ValidationError("class_weights: both classes must be present");
  const double total = static_cast<double>(examples.size());
  return {total / (2.0 * static_cast<double>(counts[0])),
          total / (2.0 * static_cast<double>(counts[1]))};
}

SentenceModel::SentenceModel(encoder::Encoder enc, SentClassifierConfig cfg, std::uint64_t seed)
    : cfg_(cfg), encoder_(std::move(enc)), head_(std::make_shared<nn::ParamStore>()) {
  std::mt19937_64 rng(seed);
  const std::size_t d = encoder_.hidden_size();
  std::size_t mlp_in = 0;
  if (cfg_.head == SentClassifierConfig::Head::Recurrent) {
    bilstm_.emplace(*head_, "bilstm", d, cfg_.recurrent_hidden, cfg_.recurrent_layers,
                    cfg_.dropout, rng);
    mlp_in = bilstm_->out_dim();
  } else {
    conv_.emplace(*head_, "conv", d, cfg_.conv_kernel_sizes, cfg_.conv_filters, rng);
    mlp_in = conv_->out_dim();
  }
  mlp_.emplace(*head_, "mlp", mlp_in, cfg_.linear_sizes, 2, cfg_.dropout, rng);
}

ag::NodeId SentenceModel::logits_for_sentence(ag::Graph& g, const corpus::Sentence& sentence,
                                              bool training, std::mt19937_64& rng) const {
  std::vector<std::string> words;
  words.reserve(sentence.tokens.size());
  for (const auto& tok : sentence.tokens) words.push_back(tok.surface);
  encoder::Encoder::GraphEncoding enc = encoder_.build(g, words, training, rng);
  // Fully truncated sentences fall back to the classification vector.
  ag::NodeId tokens = g.value(enc.word_vectors).rows() > 0 ? enc.word_vectors : enc.cls_vector;
  ag::NodeId pooled;
  if (cfg_.head == SentClassifierConfig::Head::Recurrent)
    pooled = bilstm_->forward(g, tokens, training, rng).pooled;
  else
    pooled = conv_->forward(g, tokens);
  return mlp_->forward(g, pooled, training, rng);
}

nn::TrainLog SentenceModel::train(const std::vector<corpus::Document>& docs,
                                  const SentTrainConfig& tcfg) {
  if (tcfg.batch_size < 1 || tcfg.learning_rate <= 0.0)
    throw std::invalid_argument("train_sentence_classifier: batch size and learning rate "
                                "must be positive");
  std::vector<LabeledSentence> examples;
  for (const auto& doc : docs) {
    if (!doc.has_gold_sentences())
      throw corpus::ValidationError("train_sentence_classifier: doc '" + doc.doc_id +
                                    "' lacks gold contribution labels");
    for (const auto& sentence : doc.sentences) {
      if (sentence.tokens.empty()) continue;
      examples.emplace_back(sentence, sentence.gold_contribution.value_or(false) ? 1 : 0);
    }
  }
  if (examples.empty())
    throw corpus::ValidationError("train_sentence_classifier: no labeled sentences");

  // Weights come from the original distribution; oversampling happens after.
  std::array<double, 2> weights{1.0, 1.0};
  if (tcfg.class_weighting) weights = class_weights(examples);
  if (tcfg.oversample_minority) examples = balance_training_set(examples, tcfg.seed);

  std::vector<ag::Parameter*> params = head_->trainable();
  if (encoder_.fine_tune())
    for (auto* p : encoder_.params().trainable()) params.push_back(p);
  nn::AdamW optimizer(params, {.learning_rate = tcfg.learning_rate,
                               .weight_decay = tcfg.weight_decay});

  std::mt19937_64 rng(tcfg.seed + 1);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  nn::TrainLog log;
  for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < order.size(); b += tcfg.batch_size) {
      const std::size_t b_end = std::min(order.size(), b + tcfg.batch_size);
      optimizer.zero_grads();
      ag::Graph g;
      std::vector<ag::NodeId> losses;
      for (std::size_t k = b; k < b_end; ++k) {
        const auto& [sentence, label] = examples[order[k]];
        ag::NodeId logits = logits_for_sentence(g, sentence, /*training=*/true, rng);
        losses.push_back(g.softmax_cross_entropy(logits, static_cast<std::size_t>(label),
                                                 weights[label == 1 ? 1 : 0]));
      }
      ag::NodeId total = losses[0];
      for (std::size_t i = 1; i < losses.size(); ++i) total = g.add(total, losses[i]);
      ag::NodeId loss = g.scale(total, 1.0 / static_cast<double>(losses.size()));
      g.backward(loss);
      optimizer.step();
      epoch_loss += g.value(loss)(0, 0) * static_cast<double>(losses.size());
      count += losses.size();
    }
    log.epochs.push_back({static_cast<int>(epoch) + 1,
                          count == 0 ? 0.0 : epoch_loss / static_cast<double>(count)});
  }
  return log;
}

std::array<double, 2> SentenceModel::scores(const corpus::Sentence& sentence) const {
  ag::Graph g;
  std::mt19937_64 rng(0);
  ag::NodeId logits = logits_for_sentence(g, sentence, /*training=*/false, rng);
  const num::Matrix& z = g.value(logits);
  return {z(0, 0), z(0, 1)};
}

bool SentenceModel::predict_sentence(const corpus::Sentence& sentence) const {
  if (sentence.tokens.empty()) return false;
  const auto z = scores(sentence);
  return z[1] > z[0];  // tie -> negative
}

std::vector<int> SentenceModel::predict(const corpus::Document& doc) const {
  std::vector<int> out;
  for (const auto& sentence : doc.sentences)
    if (predict_sentence(sentence)) out.push_back(sentence.index);
  return out;
}

void SentenceModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  json j = {
      {"recurrent_layers", cfg_.recurrent_layers},
      {"recurrent_hidden", cfg_.recurrent_hidden},
      {"linear_sizes", cfg_.linear_sizes},
      {"dropout", cfg_.dropout},
      {"head", cfg_.head == SentClassifierConfig::Head::Recurrent ? "recurrent" : "convolutional"},
      {"conv_kernel_sizes", cfg_.conv_kernel_sizes},
      {"conv_filters", cfg_.conv_filters},
      {"max_token_length", encoder_.config().max_token_length},
  };
  std::ofstream os(dir / "config.json");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  head_->save(dir / "head.bin");
  encoder_.save_checkpoint(dir / "encoder");
}

SentenceModel SentenceModel::load(const fs::path& dir) {
  std::ifstream is(dir / "config.json");
  if (!is) throw std::runtime_error("sentence classifier checkpoint missing: " + dir.string());
  json j = json::parse(is);
  SentClassifierConfig cfg;
  cfg.recurrent_layers = j.at("recurrent_layers").get<std::size_t>();
  cfg.recurrent_hidden = j.at("recurrent_hidden").get<std::size_t>();
  cfg.linear_sizes = j.at("linear_sizes").get<std::vector<std::size_t>>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.head = j.at("head").get<std::string>() == "convolutional"
                 ? SentClassifierConfig::Head::Convolutional
                 : SentClassifierConfig::Head::Recurrent;
  cfg.conv_kernel_sizes = j.at("conv_kernel_sizes").get<std::vector<std::size_t>>();
  cfg.conv_filters = j.at("conv_filters").get<std::size_t>();

  encoder::EncoderConfig ecfg;
  ecfg.checkpoint_id = (dir / "encoder").string();
  ecfg.max_token_length = j.at("max_token_length").get<std::size_t>();
  ecfg.fine_tune = false;
  encoder::Encoder enc = encoder::Encoder::load_from_dir(dir / "encoder", ecfg);

  SentenceModel model(std::move(enc), cfg, /*seed=*/13);
  model.head_->load(dir / "head.bin");
  return model;
}

}  // namespace ckg::sentcls
