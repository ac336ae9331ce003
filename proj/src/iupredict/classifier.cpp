#include "ckg/iupredict/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

namespace ckg::iupredict {

namespace fs = std::filesystem;
using corpus::InfoUnitLabel;
using nlohmann::json;

const std::vector<InfoUnitLabel>& classifier_units() {
  static const std::vector<InfoUnitLabel> units = [] {
    std::vector<InfoUnitLabel> out;
    for (InfoUnitLabel u : corpus::all_info_units())
      if (u != InfoUnitLabel::ResearchProblem && u != InfoUnitLabel::Code) out.push_back(u);
    return out;
  }();
  return units;
}

std::string concat_document_phrases(const std::vector<corpus::PhraseSpan>& phrases) {
  std::vector<corpus::PhraseSpan> sorted = phrases;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sentence_index, a.start_char) < std::tie(b.sentence_index, b.start_char);
  });
  std::string out;
  for (const auto& p : sorted) {
    if (!out.empty()) out.push_back(' ');
    out += p.text;
  }
  return out;
}

IuModel::IuModel(encoder::Encoder enc, IuClassifierConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      net_(std::move(enc),
           models::TextNetConfig{cfg.recurrent_layers, cfg.recurrent_hidden, cfg.linear_sizes,
                                 cfg.dropout, classifier_units().size()},
           seed) {
  if (cfg_.sigmoid_threshold <= 0.0 || cfg_.sigmoid_threshold >= 1.0)
    throw std::invalid_argument("iu classifier: sigmoid_threshold must be in (0,1)");
}

IuModel::IuModel(models::TextClassifierNet net, IuClassifierConfig cfg)
    : cfg_(cfg), net_(std::move(net)) {}

nn::TrainLog IuModel::train(const std::vector<corpus::Document>& docs,
                            const IuTrainConfig& tcfg) {
  if (tcfg.batch_size < 1 || tcfg.learning_rate <= 0.0)
    throw std::invalid_argument("train_iu_classifier: batch size and learning rate "
                                "must be positive");
  struct Example {
    std::vector<std::string> words;
    std::vector<double> targets;
  };
  std::vector<Example> examples;
  for (const auto& doc : docs) {
    if (!doc.gold_phrases || !doc.gold_triplets)
      throw corpus::ValidationError("train_iu_classifier: doc '" + doc.doc_id +
                                    "' lacks gold phrases or triplets");
    Example ex;
    ex.words = models::split_words(concat_document_phrases(*doc.gold_phrases));
    ex.targets.assign(classifier_units().size(), 0.0);
    for (std::size_t i = 0; i < classifier_units().size(); ++i)
      if (doc.gold_triplets->count(classifier_units()[i])) ex.targets[i] = 1.0;
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw corpus::ValidationError("train_iu_classifier: no documents");

  nn::AdamW optimizer(net_.trainable_params(), {.learning_rate = tcfg.learning_rate,
                                                .weight_decay = tcfg.weight_decay});
  std::mt19937_64 rng(tcfg.seed);
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
        const Example& ex = examples[order[k]];
        ag::NodeId logits = net_.logits(g, ex.words, /*training=*/true, rng);
        losses.push_back(g.sigmoid_binary_cross_entropy(logits, ex.targets));
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

std::vector<InfoUnitLabel> IuModel::apply_threshold(
    const std::map<InfoUnitLabel, double>& scores, double threshold) {
  std::vector<InfoUnitLabel> predicted;
  for (const auto& [unit, score] : scores)
    if (score >= threshold) predicted.push_back(unit);
  if (!predicted.empty()) return predicted;
  // Every document carries at least some units; fall back to the top two.
  std::vector<std::pair<double, InfoUnitLabel>> ranked;
  for (const auto& [unit, score] : scores) ranked.emplace_back(score, unit);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < std::min<std::size_t>(2, ranked.size()); ++i)
    predicted.push_back(ranked[i].second);
  std::sort(predicted.begin(), predicted.end());
  return predicted;
}

IuPrediction IuModel::predict(const std::string& concatenated_phrases) const {
  const std::vector<double> z = net_.scores(models::split_words(concatenated_phrases));
  IuPrediction out;
  for (std::size_t i = 0; i < classifier_units().size(); ++i)
    out.scores[classifier_units()[i]] = 1.0 / (1.0 + std::exp(-z[i]));
  out.predicted = apply_threshold(out.scores, cfg_.sigmoid_threshold);
  return out;
}

void IuModel::save(const fs::path& dir) const {
  net_.save(dir);
  json j = {{"sigmoid_threshold", cfg_.sigmoid_threshold}, {"max_tokens", cfg_.max_tokens}};
  std::ofstream os(dir / "iu.json");
  os << j.dump(2) << "\n";
}

IuModel IuModel::load(const fs::path& dir) {
  models::TextClassifierNet net = models::TextClassifierNet::load(dir);
  IuClassifierConfig cfg;
  std::ifstream is(dir / "iu.json");
  if (is) {
    json j = json::parse(is);
    cfg.sigmoid_threshold = j.value("sigmoid_threshold", 0.5);
    cfg.max_tokens = j.value("max_tokens", std::size_t{512});
  }
  cfg.recurrent_layers = net.config().recurrent_layers;
  cfg.recurrent_hidden = net.config().recurrent_hidden;
  cfg.linear_sizes = net.config().linear_sizes;
  cfg.dropout = net.config().dropout;
  return IuModel(std::move(net), cfg);
}

}  // namespace ckg::iupredict
