#include "ckg/encoder/encoder.hpp"

#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ckg::encoder {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path Encoder::resolve_checkpoint(const std::string& checkpoint_id) {
  fs::path direct(checkpoint_id);
  if (fs::is_directory(direct)) return direct;
  const char* cache = std::getenv(kCheckpointDirEnv);
  fs::path root = cache ? fs::path(cache) : fs::path("checkpoints");
  fs::path resolved = root / checkpoint_id;
  if (!fs::is_directory(resolved))
    throw std::runtime_error("checkpoint '" + checkpoint_id + "' not found (looked in '" +
                             resolved.string() + "'; set " + std::string(kCheckpointDirEnv) +
                             " to the checkpoint cache directory)");
  return resolved;
}

Encoder Encoder::load(const EncoderConfig& cfg) {
  return load_from_dir(resolve_checkpoint(cfg.checkpoint_id), cfg);
}

Encoder Encoder::load_from_dir(const fs::path& dir, const EncoderConfig& cfg) {
  std::ifstream is(dir / "config.json");
  if (!is) throw std::runtime_error("checkpoint missing config.json: " + dir.string());
  json j = json::parse(is);

  Encoder enc;
  enc.cfg_ = cfg;
  if (enc.cfg_.checkpoint_id.empty()) enc.cfg_.checkpoint_id = dir.string();
  if (enc.cfg_.max_token_length < 1)
    throw std::invalid_argument("encoder: max_token_length must be >= 1");

  enc.vocab_ = WordPieceVocab::load(dir / "vocab.txt", j.value("lowercase", true));
  enc.tcfg_.hidden_size = j.at("hidden_size").get<std::size_t>();
  enc.tcfg_.num_layers = j.at("num_layers").get<std::size_t>();
  enc.tcfg_.num_heads = j.at("num_heads").get<std::size_t>();
  enc.tcfg_.intermediate_size = j.at("intermediate_size").get<std::size_t>();
  enc.tcfg_.max_position = j.at("max_position").get<std::size_t>();
  enc.tcfg_.hidden_dropout = j.value("hidden_dropout", 0.1);
  enc.tcfg_.attention_dropout = j.value("attention_dropout", 0.1);
  enc.tcfg_.vocab_size = enc.vocab_.size();

  enc.store_ = std::make_shared<nn::ParamStore>();
  enc.store_->load(dir / "weights.bin");
  std::mt19937_64 rng(0);  // unused: all parameters come from the file
  enc.transformer_ = std::make_shared<nn::TransformerEncoder>(*enc.store_, enc.tcfg_, rng);
  for (auto* p : enc.store_->all()) p->trainable = cfg.fine_tune;
  return enc;
}

void Encoder::write_tiny_checkpoint(const fs::path& dir, std::uint64_t seed, std::size_t hidden,
                                    std::size_t layers, std::size_t heads,
                                    std::size_t intermediate, std::size_t max_position) {
  fs::create_directories(dir);
  WordPieceVocab vocab = WordPieceVocab::from_tokens(WordPieceVocab::ascii_char_tokens(), true);
  vocab.save(dir / "vocab.txt");

  nn::TransformerConfig tcfg;
  tcfg.hidden_size = hidden;
  tcfg.num_layers = layers;
  tcfg.num_heads = heads;
  tcfg.intermediate_size = intermediate;
  tcfg.max_position = max_position;
  tcfg.vocab_size = vocab.size();

  nn::ParamStore store;
  std::mt19937_64 rng(seed);
  nn::TransformerEncoder transformer(store, tcfg, rng);
  store.save(dir / "weights.bin");

  json j = {
      {"hidden_size", hidden},       {"num_layers", layers},
      {"num_heads", heads},          {"intermediate_size", intermediate},
      {"max_position", max_position}, {"lowercase", true},
      {"hidden_dropout", 0.1},       {"attention_dropout", 0.1},
  };
  std::ofstream os(dir / "config.json");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write checkpoint config: " + dir.string());
}

Encoder::Plan Encoder::plan_with_budget(const std::vector<std::string>& words,
                                        std::size_t budget) const {
  Plan plan;
  plan.piece_ids.push_back(vocab_.cls_id());
  std::size_t used = 0;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::vector<int> pieces = vocab_.word_pieces(words[w]);
    if (used + pieces.size() > budget) {
      plan.dropped_words = words.size() - w;  // no partial words
      break;
    }
    plan.first_piece_rows.push_back(plan.piece_ids.size());
    plan.retained_word_indices.push_back(w);
    plan.piece_ids.insert(plan.piece_ids.end(), pieces.begin(), pieces.end());
    used += pieces.size();
  }
  plan.piece_ids.push_back(vocab_.sep_id());
  // Special tokens count against the positional capacity of the model.
  if (plan.piece_ids.size() > tcfg_.max_position)
    throw std::runtime_error("encoder: planned sequence exceeds model max_position");
  return plan;
}

Encoder::Plan Encoder::plan(const std::vector<std::string>& words) const {
  std::size_t budget = std::min(cfg_.max_token_length, tcfg_.max_position - 2);
  return plan_with_budget(words, budget);
}

Encoder::GraphEncoding Encoder::build(ag::Graph& g, const std::vector<std::string>& words,
                                      bool training, std::mt19937_64& rng) const {
  if (words.empty()) throw std::invalid_argument("encoder: empty sentence");
  Plan p = plan(words);
  ag::NodeId hidden = transformer_->forward(g, p.piece_ids, training, rng);
  GraphEncoding out;
  out.cls_vector = g.slice_rows(hidden, 0, 1);
  if (!p.first_piece_rows.empty()) {
    std::vector<int> rows(p.first_piece_rows.begin(), p.first_piece_rows.end());
    out.word_vectors = g.gather_rows(hidden, rows);
  } else {
    out.word_vectors = g.constant(num::Matrix(0, hidden_size()));
  }
  out.retained_word_indices = std::move(p.retained_word_indices);
  out.dropped_words = p.dropped_words;
  return out;
}

TokenEncoding Encoder::encode_tokens(const corpus::Sentence& sentence) const {
  if (sentence.tokens.empty())
    throw std::invalid_argument("encoder: sentence " + std::to_string(sentence.index) +
                                " has no tokens");
  std::vector<std::string> words;
  words.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) words.push_back(t.surface);

  ag::Graph g;
  std::mt19937_64 rng(0);  // inference mode: no dropout, rng unused
  GraphEncoding enc = build(g, words, /*training=*/false, rng);
  TokenEncoding out;
  out.vectors = g.value(enc.word_vectors);
  out.n_words = out.vectors.rows();
  out.retained_word_indices = std::move(enc.retained_word_indices);
  out.dropped_words = enc.dropped_words;
  return out;
}

std::vector<double> Encoder::encode_sentence(const corpus::Sentence& sentence) const {
  if (sentence.tokens.empty())
    throw std::invalid_argument("encoder: sentence " + std::to_string(sentence.index) +
                                " has no tokens");
  std::vector<std::string> words;
  for (const auto& t : sentence.tokens) words.push_back(t.surface);
  ag::Graph g;
  std::mt19937_64 rng(0);
  GraphEncoding enc = build(g, words, /*training=*/false, rng);
  const num::Matrix& cls = g.value(enc.cls_vector);
  return cls.flat();
}

void Encoder::save_checkpoint(const fs::path& dir) const {
  fs::create_directories(dir);
  vocab_.save(dir / "vocab.txt");
  store_->save(dir / "weights.bin");
  json j = {
      {"hidden_size", tcfg_.hidden_size},
      {"num_layers", tcfg_.num_layers},
      {"num_heads", tcfg_.num_heads},
      {"intermediate_size", tcfg_.intermediate_size},
      {"max_position", tcfg_.max_position},
      {"lowercase", vocab_.lowercase()},
      {"hidden_dropout", tcfg_.hidden_dropout},
      {"attention_dropout", tcfg_.attention_dropout},
  };
  std::ofstream os(dir / "config.json");
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("cannot write checkpoint config: " + dir.string());
}

}  // namespace ckg::encoder
