#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ckg/corpus/types.hpp"

namespace ckg::iupredict {

struct HeuristicsConfig {
  int research_problem_max_line = 30;
  std::vector<std::string> url_schemes{"http", "https", "ftp"};
  bool allow_bare_github = true;  // "github.com/..." without a scheme
  std::vector<std::string> url_required_tokens{"our", "code"};
};

// Phrases of sentences within the first N lines that carry exactly one
// extracted phrase; these become Research-problem triplet objects.
std::vector<corpus::PhraseSpan> detect_research_problem(
    const corpus::Document& doc, const std::vector<corpus::PhraseSpan>& phrases,
    const HeuristicsConfig& cfg = {});

// Sentences containing a URL plus a whole-word "our"/"code" cue; all URLs in
// a matching sentence are extracted (trailing punctuation trimmed).
std::vector<std::pair<int, std::string>> detect_code_urls(const corpus::Document& doc,
                                                          const HeuristicsConfig& cfg = {});

}  // namespace ckg::iupredict
