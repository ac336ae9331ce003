#include "ckg/tripletform/classifiers.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "ckg/util/text.hpp"

namespace ckg::tripletform {

namespace fs = std::filesystem;
using corpus::InfoUnitLabel;
using corpus::Triplet;

namespace {

template <typename Example>
nn::TrainLog run_epochs(models::TextClassifierNet& net, std::vector<Example>& examples,
                        std::size_t batch_size, std::size_t epochs, double learning_rate,
                        double weight_decay, std::uint64_t seed,
                        const std::function<ag::NodeId(ag::Graph&, const Example&,
                                                       std::mt19937_64&)>& loss_fn) {
  if (batch_size < 1 || learning_rate <= 0.0)
    throw std::invalid_argument("classifier training: batch size and learning rate "
                                "must be positive");
  nn::AdamW optimizer(net.trainable_params(),
                      {.learning_rate = learning_rate, .weight_decay = weight_decay});
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  nn::TrainLog log;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t count = 0;
    for (std::size_t b = 0; b < order.size(); b += batch_size) {
      const std::size_t b_end = std::min(order.size(), b + batch_size);
      optimizer.zero_grads();
      ag::Graph g;
      std::vector<ag::NodeId> losses;
      for (std::size_t k = b; k < b_end; ++k)
        losses.push_back(loss_fn(g, examples[order[k]], rng));
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

}  // namespace

PredicateModel::PredicateModel(encoder::Encoder enc, PredicateClassifierConfig cfg,
                               std::uint64_t seed)
    : net_(std::move(enc),
           models::TextNetConfig{cfg.recurrent_layers, cfg.recurrent_hidden, cfg.linear_sizes,
                                 cfg.dropout, 2},
           seed) {}

nn::TrainLog PredicateModel::train(const std::vector<corpus::Document>& docs,
                                   const PredicateTrainConfig& tcfg) {
  struct Example {
    std::vector<std::string> words;
    int label;
  };
  std::vector<Example> examples;
  std::size_t positives = 0;
  for (const auto& doc : docs) {
    if (!doc.gold_phrases || !doc.gold_triplets)
      throw corpus::ValidationError("predicate classifier: doc '" + doc.doc_id +
                                    "' lacks gold phrases or triplets");
    std::set<std::string> predicates;
    for (const auto& [unit, list] : *doc.gold_triplets)
      for (const auto& t : list) predicates.insert(util::normalize_whitespace(t.predicate));
    for (const auto& phrase : *doc.gold_phrases) {
      Example ex;
      ex.words = models::split_words(phrase.text);
      ex.label = predicates.count(util::normalize_whitespace(phrase.text)) ? 1 : 0;
      positives += ex.label;
      examples.push_back(std::move(ex));
    }
  }
  if (examples.empty())
    throw corpus::ValidationError("predicate classifier: no gold phrases to train on");

  // Weighted binary cross-entropy against the class imbalance.
  std::array<double, 2> weights{1.0, 1.0};
  const std::size_t negatives = examples.size() - positives;
  if (positives > 0 && negatives > 0) {
    const double total = static_cast<double>(examples.size());
    weights = {total / (2.0 * static_cast<double>(negatives)),
               total / (2.0 * static_cast<double>(positives))};
  }

  std::function<ag::NodeId(ag::Graph&, const Example&, std::mt19937_64&)> loss_fn =
      [&](ag::Graph& g, const Example& ex, std::mt19937_64& rng) {
        ag::NodeId logits = net_.logits(g, ex.words, /*training=*/true, rng);
        return g.softmax_cross_entropy(logits, static_cast<std::size_t>(ex.label),
                                       weights[ex.label]);
      };
  return run_epochs(net_, examples, tcfg.batch_size, tcfg.epochs, tcfg.learning_rate,
                    tcfg.weight_decay, tcfg.seed, loss_fn);
}

bool PredicateModel::predict_one(const std::string& phrase_text) const {
  const std::vector<double> z = net_.scores(models::split_words(phrase_text));
  return z[1] > z[0];
}

std::vector<bool> PredicateModel::predict(const std::vector<corpus::PhraseSpan>& phrases) const {
  std::vector<bool> out;
  out.reserve(phrases.size());
  for (const auto& p : phrases) out.push_back(predict_one(p.text));
  return out;
}

void PredicateModel::save(const fs::path& dir) const { net_.save(dir); }

PredicateModel PredicateModel::load(const fs::path& dir) {
  return PredicateModel(models::TextClassifierNet::load(dir));
}

const std::vector<InfoUnitLabel>& triplet_units() {
  static const std::vector<InfoUnitLabel> units = [] {
    std::vector<InfoUnitLabel> out;
    for (InfoUnitLabel u : corpus::all_info_units())
      if (u != InfoUnitLabel::ResearchProblem && u != InfoUnitLabel::Code &&
          u != InfoUnitLabel::Baselines && u != InfoUnitLabel::AblationAnalysis)
        out.push_back(u);
    return out;
  }();
  return units;
}

TripletModel::TripletModel(encoder::Encoder enc, TripletClassifierConfig cfg, std::uint64_t seed)
    : net_(std::move(enc),
           models::TextNetConfig{cfg.recurrent_layers, cfg.recurrent_hidden, cfg.linear_sizes,
                                 cfg.dropout, triplet_units().size()},
           seed) {}

nn::TrainLog TripletModel::train(const std::vector<corpus::Document>& docs,
                                 const TripletTrainConfig& tcfg) {
  struct Example {
    std::vector<std::string> words;
    std::size_t target;
  };
  std::vector<Example> examples;
  for (const auto& doc : docs) {
    if (!doc.gold_triplets)
      throw corpus::ValidationError("triplet classifier: doc '" + doc.doc_id +
                                    "' lacks gold triplets");
    for (std::size_t u = 0; u < triplet_units().size(); ++u) {
      auto it = doc.gold_triplets->find(triplet_units()[u]);
      if (it == doc.gold_triplets->end()) continue;
      for (const auto& t : it->second) {
        Example ex;
        ex.words = models::split_words(t.subject + " " + t.predicate + " " + t.object);
        ex.target = u;
        examples.push_back(std::move(ex));
      }
    }
  }
  if (examples.empty())
    throw corpus::ValidationError("triplet classifier: no gold triplets in classifier units");

  std::function<ag::NodeId(ag::Graph&, const Example&, std::mt19937_64&)> loss_fn =
      [&](ag::Graph& g, const Example& ex, std::mt19937_64& rng) {
        ag::NodeId logits = net_.logits(g, ex.words, /*training=*/true, rng);
        return g.softmax_cross_entropy(logits, ex.target);
      };
  return run_epochs(net_, examples, tcfg.batch_size, tcfg.epochs, tcfg.learning_rate,
                    tcfg.weight_decay, tcfg.seed, loss_fn);
}

std::map<InfoUnitLabel, double> TripletModel::scores(const Triplet& t) const {
  const std::vector<double> z =
      net_.scores(models::split_words(t.subject + " " + t.predicate + " " + t.object));
  std::map<InfoUnitLabel, double> out;
  for (std::size_t i = 0; i < triplet_units().size(); ++i) out[triplet_units()[i]] = z[i];
  return out;
}

void TripletModel::save(const fs::path& dir) const { net_.save(dir); }

TripletModel TripletModel::load(const fs::path& dir) {
  return TripletModel(models::TextClassifierNet::load(dir));
}

std::vector<Triplet> classify_triplets(const TripletModel& model,
                                       const std::vector<Triplet>& triplets,
                                       const std::map<InfoUnitLabel, double>& predicted_units) {
  if (predicted_units.empty())
    throw corpus::ValidationError("classify_triplets: predicted unit set must be non-empty");

  std::vector<Triplet> out;
  out.reserve(triplets.size());
  for (const Triplet& t : triplets) {
    const std::map<InfoUnitLabel, double> z = model.scores(t);
    bool assigned = false;
    double best = 0.0;
    InfoUnitLabel best_unit = InfoUnitLabel::Model;
    for (const auto& [unit, score] : z) {
      if (!predicted_units.count(unit)) continue;
      if (!assigned || score > best) {
        assigned = true;
        best = score;
        best_unit = unit;
      }
    }
    if (!assigned) {
      // No predicted unit among the eight classes: take the best predicted
      // unit by its own prediction score.
      best_unit = std::max_element(predicted_units.begin(), predicted_units.end(),
                                   [](const auto& a, const auto& b) {
                                     return a.second < b.second;
                                   })->first;
    }
    Triplet labeled = t;
    labeled.unit = best_unit;
    out.push_back(std::move(labeled));
  }
  return out;
}

}  // namespace ckg::tripletform
