#include "ckg/encoder/wordpiece.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

namespace ckg::encoder {

WordPieceVocab WordPieceVocab::load(const std::filesystem::path& vocab_file, bool lowercase) {
  std::ifstream is(vocab_file);
  if (!is) throw std::runtime_error("cannot open vocab file " + vocab_file.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  while (!tokens.empty() && tokens.back().empty()) tokens.pop_back();
  return from_tokens(std::move(tokens), lowercase);
}

WordPieceVocab WordPieceVocab::from_tokens(std::vector<std::string> tokens, bool lowercase) {
  WordPieceVocab v;
  v.lowercase_ = lowercase;
  v.id_to_token_ = std::move(tokens);
  for (std::size_t i = 0; i < v.id_to_token_.size(); ++i) {
    if (!v.token_to_id_.emplace(v.id_to_token_[i], static_cast<int>(i)).second)
      throw std::runtime_error("duplicate vocab token: '" + v.id_to_token_[i] + "'");
  }
  auto find = [&](const char* t) {
    auto it = v.token_to_id_.find(t);
    return it == v.token_to_id_.end() ? -1 : it->second;
  };
  v.pad_id_ = find("[PAD]");
  v.unk_id_ = find("[UNK]");
  v.cls_id_ = find("[CLS]");
  v.sep_id_ = find("[SEP]");
  if (v.unk_id_ < 0 || v.cls_id_ < 0 || v.sep_id_ < 0)
    throw std::runtime_error("vocab must contain [UNK], [CLS] and [SEP]");
  return v;
}

std::vector<int> WordPieceVocab::word_pieces(const std::string& word) const {
  std::string w = word;
  if (lowercase_)
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (w.empty()) return {unk_id_};

  std::vector<int> pieces;
  std::size_t start = 0;
  while (start < w.size()) {
    std::size_t end = w.size();
    int found = -1;
    while (end > start) {
      std::string candidate = w.substr(start, end - start);
      if (start > 0) candidate = "##" + candidate;
      auto it = token_to_id_.find(candidate);
      if (it != token_to_id_.end()) {
        found = it->second;
        break;
      }
      --end;
    }
    if (found < 0) return {unk_id_};  // whole word becomes [UNK]
    pieces.push_back(found);
    start = end;
  }
  return pieces;
}

void WordPieceVocab::save(const std::filesystem::path& vocab_file) const {
  std::ofstream os(vocab_file);
  if (!os) throw std::runtime_error("cannot write vocab file " + vocab_file.string());
  for (const std::string& t : id_to_token_) os << t << "\n";
}

std::vector<std::string> WordPieceVocab::ascii_char_tokens() {
  std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
  std::string chars;
  for (char c = 'a'; c <= 'z'; ++c) chars.push_back(c);
  for (char c = '0'; c <= '9'; ++c) chars.push_back(c);
  for (char c : std::string(".,;:!?()[]{}<>/-_'\"&%$#@+=*~^|\\`")) chars.push_back(c);
  for (char c : chars) {
    tokens.push_back(std::string(1, c));
    tokens.push_back("##" + std::string(1, c));
  }
  return tokens;
}

}  // namespace ckg::encoder
