#include "ckg/iupredict/heuristics.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace ckg::iupredict {

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool has_required_token(const corpus::Sentence& sentence, const HeuristicsConfig& cfg) {
  for (const auto& tok : sentence.tokens) {
    const std::string t = lower(tok.surface);
    for (const auto& req : cfg.url_required_tokens)
      if (t == req) return true;
  }
  return false;
}

std::string trim_url(std::string url) {
  while (!url.empty()) {
    const char c = url.back();
    if (c == '.' || c == ',' || c == ';' || c == ':' || c == ')' || c == ']' || c == '}' ||
        c == '\'' || c == '"')
      url.pop_back();
    else
      break;
  }
  return url;
}

}  // namespace

std::vector<corpus::PhraseSpan> detect_research_problem(
    const corpus::Document& doc, const std::vector<corpus::PhraseSpan>& phrases,
    const HeuristicsConfig& cfg) {
  std::map<int, std::vector<const corpus::PhraseSpan*>> by_sentence;
  for (const auto& p : phrases) {
    doc.sentence(p.sentence_index);  // range check
    if (p.sentence_index <= cfg.research_problem_max_line)
      by_sentence[p.sentence_index].push_back(&p);
  }

  std::vector<corpus::PhraseSpan> out;
  for (const auto& [index, list] : by_sentence)
    if (list.size() == 1) out.push_back(*list.front());
  return out;
}

std::vector<std::pair<int, std::string>> detect_code_urls(const corpus::Document& doc,
                                                          const HeuristicsConfig& cfg) {
  std::vector<std::pair<int, std::string>> out;
  for (const auto& sentence : doc.sentences) {
    if (!has_required_token(sentence, cfg)) continue;
    for (const auto& tok : sentence.tokens) {
      const std::string t = tok.surface;
      const std::string lt = lower(t);
      bool is_url = false;
      for (const auto& scheme : cfg.url_schemes) {
        if (lt.rfind(scheme + "://", 0) == 0 && t.size() > scheme.size() + 3) {
          is_url = true;
          break;
        }
      }
      if (!is_url && cfg.allow_bare_github && lt.rfind("github.com/", 0) == 0) is_url = true;
      if (!is_url) continue;
      const std::string url = trim_url(t);
      if (!url.empty()) out.emplace_back(sentence.index, url);
    }
  }
  return out;
}

}  // namespace ckg::iupredict
