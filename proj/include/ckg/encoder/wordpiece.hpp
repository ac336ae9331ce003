#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace ckg::encoder {

// Greedy longest-match-first sub-word tokenizer over a fixed vocabulary.
// Continuation pieces carry the "##" prefix; words with no match collapse
// to the unknown token.
class WordPieceVocab {
 public:
  static WordPieceVocab load(const std::filesystem::path& vocab_file, bool lowercase);
  static WordPieceVocab from_tokens(std::vector<std::string> tokens, bool lowercase);

  std::vector<int> word_pieces(const std::string& word) const;

  int pad_id() const { return pad_id_; }
  int unk_id() const { return unk_id_; }
  int cls_id() const { return cls_id_; }
  int sep_id() const { return sep_id_; }
  std::size_t size() const { return id_to_token_.size(); }
  const std::string& token(int id) const { return id_to_token_.at(id); }
  bool lowercase() const { return lowercase_; }

  void save(const std::filesystem::path& vocab_file) const;

  // A small character-level vocabulary: special tokens, ASCII letters,
  // digits and punctuation plus their "##" continuations. Any ASCII word
  // tokenizes without hitting [UNK].
  static std::vector<std::string> ascii_char_tokens();

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
  bool lowercase_ = false;
  int pad_id_ = -1, unk_id_ = -1, cls_id_ = -1, sep_id_ = -1;
};

}  // namespace ckg::encoder
