#include "ckg/phrasecrf/model.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ckg/crf/linear_chain.hpp"

namespace ckg::phrasecrf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<int> to_ints(const TagSequence& tags) {
  std::vector<int> out(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) out[i] = static_cast<int>(tags[i]);
  return out;
}

TagSequence from_ints(const std::vector<int>& ids) {
  TagSequence out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) out[i] = static_cast<BiluoTag>(ids[i]);
  return out;
}

double transitions_l2(const num::Matrix& t) {
  double s = 0.0;
  for (double x : t.flat()) s += x * x;
  return s;
}

// Keeps only spans fully inside the first `prefix_len` tokens.
std::pair<std::vector<corpus::PhraseSpan>, std::size_t> filter_spans_to_prefix(
    const corpus::Sentence& sentence, const std::vector<corpus::PhraseSpan>& spans,
    std::size_t prefix_len) {
  std::vector<corpus::PhraseSpan> kept;
  std::size_t dropped = 0;
  for (const auto& span : spans) {
    bool inside = true;
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      const auto& tok = sentence.tokens[i];
      if (tok.end_char > span.start_char && tok.start_char < span.end_char && i >= prefix_len) {
        inside = false;
        break;
      }
    }
    if (inside)
      kept.push_back(span);
    else
      ++dropped;
  }
  return {std::move(kept), dropped};
}

}  // namespace

double crf_sequence_score(const num::Matrix& emissions, const CrfParams& params,
                          const TagSequence& tags) {
  return crf::sequence_score(emissions, params.transitions, to_ints(tags));
}

double crf_log_prob(const num::Matrix& emissions, const CrfParams& params,
                    const TagSequence& tags) {
  return crf::log_prob(emissions, params.transitions, to_ints(tags));
}

double crf_training_loss(const std::vector<std::pair<num::Matrix, TagSequence>>& batch,
                         const CrfParams& params) {
  if (batch.empty()) throw std::invalid_argument("crf_training_loss: empty batch");
  double nll = 0.0;
  for (const auto& [emissions, tags] : batch) nll -= crf_log_prob(emissions, params, tags);
  return nll / static_cast<double>(batch.size()) +
         0.5 * params.l2_weight * transitions_l2(params.transitions);
}

double crf_training_loss_with_grads(const std::vector<std::pair<num::Matrix, TagSequence>>& batch,
                                    const CrfParams& params,
                                    std::vector<num::Matrix>& d_emissions,
                                    num::Matrix& d_transitions) {
  if (batch.empty()) throw std::invalid_argument("crf_training_loss: empty batch");
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  d_emissions.clear();
  d_transitions = num::Matrix(params.transitions.rows(), params.transitions.cols());
  double loss = 0.0;
  for (const auto& [emissions, tags] : batch) {
    num::Matrix dz, dt;
    loss += inv_m * crf::nll_with_grads(emissions, params.transitions, to_ints(tags), dz, dt);
    for (double& x : dz.flat()) x *= inv_m;
    for (std::size_t i = 0; i < dt.size(); ++i) d_transitions.flat()[i] += inv_m * dt.flat()[i];
    d_emissions.push_back(std::move(dz));
  }
  loss += 0.5 * params.l2_weight * transitions_l2(params.transitions);
  for (std::size_t i = 0; i < d_transitions.size(); ++i)
    d_transitions.flat()[i] += params.l2_weight * params.transitions.flat()[i];
  return loss;
}

TagSequence viterbi_decode(const num::Matrix& emissions, const CrfParams& params) {
  return from_ints(crf::viterbi(emissions, params.transitions));
}

std::vector<TagSequence> viterbi_decode_batch_serial(const std::vector<num::Matrix>& emissions,
                                                     const CrfParams& params) {
  std::vector<TagSequence> out(emissions.size());
  for (std::size_t i = 0; i < emissions.size(); ++i) out[i] = viterbi_decode(emissions[i], params);
  return out;
}

std::vector<TagSequence> viterbi_decode_batch(const std::vector<num::Matrix>& emissions,
                                              const CrfParams& params) {
  std::vector<TagSequence> out(emissions.size());
  const std::int64_t n = static_cast<std::int64_t>(emissions.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = viterbi_decode(emissions[static_cast<std::size_t>(i)], params);
  return out;
}

std::string variant_name(PhraseExtractorConfig::Variant v) {
  switch (v) {
    case PhraseExtractorConfig::Variant::RecurrentCrf: return "recurrent-crf";
    case PhraseExtractorConfig::Variant::EncoderCrf: return "encoder-crf";
    case PhraseExtractorConfig::Variant::EncoderRecurrentCrf: return "encoder-recurrent-crf";
  }
  return "encoder-recurrent-crf";
}

PhraseExtractorConfig::Variant variant_from_name(const std::string& name) {
  if (name == "recurrent-crf") return PhraseExtractorConfig::Variant::RecurrentCrf;
  if (name == "encoder-crf") return PhraseExtractorConfig::Variant::EncoderCrf;
  if (name == "encoder-recurrent-crf") return PhraseExtractorConfig::Variant::EncoderRecurrentCrf;
  throw std::invalid_argument("unknown phrase extractor variant: '" + name + "'");
}

WordVocab WordVocab::build(const std::vector<corpus::Document>& docs) {
  WordVocab v;
  for (const auto& doc : docs)
    for (const auto& s : doc.sentences)
      for (const auto& tok : s.tokens)
        if (v.word_to_id_.emplace(tok.surface, static_cast<int>(v.words_.size()) + 1).second)
          v.words_.push_back(tok.surface);
  return v;
}

int WordVocab::id(const std::string& word) const {
  auto it = word_to_id_.find(word);
  return it == word_to_id_.end() ? 0 : it->second;
}

void WordVocab::save(const fs::path& file) const {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  for (const auto& w : words_) os << w << "\n";
}

WordVocab WordVocab::load(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  WordVocab v;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    v.word_to_id_.emplace(line, static_cast<int>(v.words_.size()) + 1);
    v.words_.push_back(line);
  }
  return v;
}

PhraseModel::PhraseModel(std::optional<encoder::Encoder> enc, PhraseExtractorConfig cfg,
                         std::uint64_t seed)
    : cfg_(cfg), encoder_(std::move(enc)), head_(std::make_shared<nn::ParamStore>()),
      seed_(seed), init_rng_(seed) {
  const bool wants_encoder = cfg_.variant != PhraseExtractorConfig::Variant::RecurrentCrf;
  if (wants_encoder && !encoder_)
    throw std::invalid_argument("phrase extractor variant '" + variant_name(cfg_.variant) +
                                "' requires an encoder");
  if (!wants_encoder) encoder_.reset();
  ensure_modules();
}

void PhraseModel::ensure_modules() {
  transitions_ = &head_->get_or_create("crf.transitions", kTagCount + 2, kTagCount + 2,
                                       nn::zeros_init());
  std::size_t input_dim = 0;
  switch (cfg_.variant) {
    case PhraseExtractorConfig::Variant::RecurrentCrf:
      input_dim = cfg_.word_embedding_dim;
      break;
    case PhraseExtractorConfig::Variant::EncoderCrf:
    case PhraseExtractorConfig::Variant::EncoderRecurrentCrf:
      input_dim = encoder_->hidden_size();
      break;
  }
  std::size_t emission_in = input_dim;
  if (cfg_.variant != PhraseExtractorConfig::Variant::EncoderCrf) {
    bilstm_.emplace(*head_, "bilstm", input_dim, cfg_.recurrent_hidden, cfg_.recurrent_layers,
                    cfg_.dropout, init_rng_);
    emission_in = bilstm_->out_dim();
  }
  emission_layer_.emplace(*head_, "emission", emission_in, kTagCount, init_rng_);
  if (cfg_.variant == PhraseExtractorConfig::Variant::RecurrentCrf && word_vocab_)
    word_embeddings_ = &head_->get_or_create("word.embeddings", word_vocab_->size(),
                                             cfg_.word_embedding_dim, nn::normal_init(init_rng_, 0.02));
}

ag::NodeId PhraseModel::emissions_for_words(ag::Graph& g, const std::vector<std::string>& words,
                                            std::vector<std::size_t>& retained, bool training,
                                            std::mt19937_64& rng) const {
  ag::NodeId reps;
  if (cfg_.variant == PhraseExtractorConfig::Variant::RecurrentCrf) {
    if (!word_vocab_ || !word_embeddings_)
      throw std::runtime_error("phrase extractor: word vocabulary not initialized (train first)");
    const std::size_t n = std::min<std::size_t>(words.size(), cfg_.max_token_length);
    retained.clear();
    std::vector<int> ids;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(word_vocab_->id(words[i]));
      retained.push_back(i);
    }
    if (ids.empty()) return -1;
    reps = g.gather_rows(g.param(*word_embeddings_), ids);
  } else {
    encoder::Encoder::GraphEncoding enc = encoder_->build(g, words, training, rng);
    retained = enc.retained_word_indices;
    if (retained.empty()) return -1;
    reps = enc.word_vectors;
  }
  if (bilstm_) reps = bilstm_->forward(g, reps, training, rng).sequence;
  return emission_layer_->forward(g, reps);
}

nn::TrainLog PhraseModel::train(const std::vector<corpus::Document>& docs,
                                const PhraseTrainConfig& tcfg) {
  if (tcfg.batch_size < 1 || tcfg.learning_rate <= 0.0)
    throw std::invalid_argument("train_phrase_extractor: batch size and learning rate "
                                "must be positive");
  struct Example {
    const corpus::Sentence* sentence;
    std::vector<corpus::PhraseSpan> spans;
  };
  std::vector<Example> examples;
  nn::TrainLog log;
  for (const auto& doc : docs) {
    if (!doc.has_gold_sentences())
      throw corpus::ValidationError("train_phrase_extractor: doc '" + doc.doc_id +
                                    "' lacks gold contribution labels");
    if (!doc.gold_phrases)
      throw corpus::ValidationError("train_phrase_extractor: doc '" + doc.doc_id +
                                    "' lacks gold phrase spans");
    for (const auto& sentence : doc.sentences) {
      if (!sentence.gold_contribution.value_or(false) || sentence.tokens.empty()) continue;
      Example ex;
      ex.sentence = &sentence;
      for (const auto& span : *doc.gold_phrases)
        if (span.sentence_index == sentence.index) ex.spans.push_back(span);
      examples.push_back(std::move(ex));
    }
  }
  if (examples.empty())
    throw corpus::ValidationError("train_phrase_extractor: no gold contribution sentences");

  if (cfg_.variant == PhraseExtractorConfig::Variant::RecurrentCrf && !word_vocab_) {
    word_vocab_ = WordVocab::build(docs);
    ensure_modules();
  }

  std::vector<ag::Parameter*> params = head_->trainable();
  if (encoder_ && encoder_->fine_tune())
    for (auto* p : encoder_->params().trainable()) params.push_back(p);
  nn::AdamW optimizer(params, {.learning_rate = tcfg.learning_rate,
                               .weight_decay = tcfg.weight_decay});

  std::mt19937_64 rng(tcfg.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

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
        std::vector<std::string> words;
        for (const auto& tok : ex.sentence->tokens) words.push_back(tok.surface);
        std::vector<std::size_t> retained;
        ag::NodeId emissions = emissions_for_words(g, words, retained, /*training=*/true, rng);
        if (emissions < 0) continue;
        auto [kept, dropped] = filter_spans_to_prefix(*ex.sentence, ex.spans, retained.size());
        log.dropped_gold_spans += dropped;
        TagSequence tags = biluo_encode(*ex.sentence, kept);
        tags.resize(retained.size());  // gold prefix; dropped words carry no label
        losses.push_back(g.crf_negative_log_likelihood(emissions, g.param(*transitions_),
                                                       to_ints(tags)));
      }
      if (losses.empty()) continue;
      ag::NodeId total = losses[0];
      for (std::size_t i = 1; i < losses.size(); ++i) total = g.add(total, losses[i]);
      ag::NodeId loss = g.scale(total, 1.0 / static_cast<double>(losses.size()));
      g.backward(loss);
      double loss_value = g.value(loss)(0, 0);
      if (cfg_.l2_weight > 0.0) {
        for (ag::Parameter* p : params) {
          loss_value += 0.5 * cfg_.l2_weight * transitions_l2(p->value);
          for (std::size_t i = 0; i < p->value.size(); ++i)
            p->grad.flat()[i] += cfg_.l2_weight * p->value.flat()[i];
        }
      }
      optimizer.step();
      epoch_loss += loss_value * static_cast<double>(losses.size());
      count += losses.size();
    }
    log.epochs.push_back({static_cast<int>(epoch) + 1,
                          count == 0 ? 0.0 : epoch_loss / static_cast<double>(count)});
  }
  return log;
}

std::vector<corpus::PhraseSpan> PhraseModel::extract(const corpus::Document& doc,
                                                     const std::vector<int>& sentence_ids) const {
  std::vector<int> ids = sentence_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  CrfParams params = crf_params();
  const num::Matrix decode_transitions =
      cfg_.constrained_decode ? mask_invalid_transitions(params.transitions) : params.transitions;

  struct PerSentence {
    num::Matrix emissions;
    std::vector<std::size_t> retained;
    const corpus::Sentence* sentence = nullptr;
  };
  std::vector<PerSentence> rows;
  for (int id : ids) {
    const corpus::Sentence& sentence = doc.sentence(id);
    if (sentence.tokens.empty()) continue;
    std::vector<std::string> words;
    for (const auto& tok : sentence.tokens) words.push_back(tok.surface);
    ag::Graph g;
    std::mt19937_64 rng(0);
    std::vector<std::size_t> retained;
    ag::NodeId emissions = emissions_for_words(g, words, retained, /*training=*/false, rng);
    if (emissions < 0) continue;
    rows.push_back({g.value(emissions), std::move(retained), &sentence});
  }

  std::vector<std::vector<corpus::PhraseSpan>> per_sentence(rows.size());
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    const std::vector<int> raw = crf::viterbi(row.emissions, decode_transitions);
    per_sentence[static_cast<std::size_t>(i)] =
        biluo_decode(*row.sentence, from_ints(raw), row.retained);
  }

  std::vector<corpus::PhraseSpan> spans;
  for (auto& list : per_sentence)
    spans.insert(spans.end(), list.begin(), list.end());
  return spans;
}

CrfParams PhraseModel::crf_params() const {
  CrfParams p;
  p.transitions = transitions_->value;
  p.l2_weight = cfg_.l2_weight;
  return p;
}

void PhraseModel::save(const fs::path& dir) const {
  fs::create_directories(dir);
  json j = {
      {"variant", variant_name(cfg_.variant)},
      {"recurrent_layers", cfg_.recurrent_layers},
      {"recurrent_hidden", cfg_.recurrent_hidden},
      {"dropout", cfg_.dropout},
      {"word_embedding_dim", cfg_.word_embedding_dim},
      {"max_token_length", cfg_.max_token_length},
      {"l2_weight", cfg_.l2_weight},
      {"constrained_decode", cfg_.constrained_decode},
  };
  std::ofstream os(dir / "config.json");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  head_->save(dir / "head.bin");
  if (encoder_) encoder_->save_checkpoint(dir / "encoder");
  if (word_vocab_) word_vocab_->save(dir / "word-vocab.txt");
}

PhraseModel PhraseModel::load(const fs::path& dir,
                              std::optional<encoder::EncoderConfig> enc_override) {
  std::ifstream is(dir / "config.json");
  if (!is) throw std::runtime_error("phrase extractor checkpoint missing: " + dir.string());
  json j = json::parse(is);
  PhraseExtractorConfig cfg;
  cfg.variant = variant_from_name(j.at("variant").get<std::string>());
  cfg.recurrent_layers = j.at("recurrent_layers").get<std::size_t>();
  cfg.recurrent_hidden = j.at("recurrent_hidden").get<std::size_t>();
  cfg.dropout = j.at("dropout").get<double>();
  cfg.word_embedding_dim = j.at("word_embedding_dim").get<std::size_t>();
  cfg.max_token_length = j.at("max_token_length").get<std::size_t>();
  cfg.l2_weight = j.at("l2_weight").get<double>();
  cfg.constrained_decode = j.at("constrained_decode").get<bool>();

  std::optional<encoder::Encoder> enc;
  if (cfg.variant != PhraseExtractorConfig::Variant::RecurrentCrf) {
    encoder::EncoderConfig ecfg;
    if (enc_override) ecfg = *enc_override;
    ecfg.checkpoint_id = (dir / "encoder").string();
    ecfg.max_token_length = cfg.max_token_length;
    enc = encoder::Encoder::load_from_dir(dir / "encoder", ecfg);
  }
  PhraseModel model(std::move(enc), cfg, /*seed=*/13);
  if (cfg.variant == PhraseExtractorConfig::Variant::RecurrentCrf) {
    model.word_vocab_ = WordVocab::load(dir / "word-vocab.txt");
    model.ensure_modules();
  }
  model.head_->load(dir / "head.bin");
  return model;
}

}  // namespace ckg::phrasecrf
