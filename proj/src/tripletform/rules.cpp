#include "ckg/tripletform/rules.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "ckg/util/text.hpp"

namespace ckg::tripletform {

using corpus::PhraseSpan;
using corpus::Sentence;
using corpus::Triplet;

std::vector<std::string> default_closed_predicates() {
  return {"has", "on", "by", "for", "has value", "has description", "based on", "called"};
}

std::vector<PhraseSpan> sentence_phrases_in_order(const std::vector<PhraseSpan>& phrases,
                                                  int sentence_index) {
  std::vector<PhraseSpan> out;
  for (const auto& p : phrases)
    if (p.sentence_index == sentence_index) out.push_back(p);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.start_char < b.start_char;
  });
  return out;
}

std::vector<Triplet> form_predicate_triplets(const std::vector<PhraseSpan>& ordered_phrases,
                                             const std::vector<bool>& predicate_flags) {
  if (ordered_phrases.size() != predicate_flags.size())
    throw corpus::ValidationError("form_predicate_triplets: flag count mismatch");
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < ordered_phrases.size(); ++i) {
    if (!predicate_flags[i]) continue;
    if (i == 0 || i + 1 >= ordered_phrases.size()) continue;  // edge predicate: skip
    Triplet t;
    t.subject = ordered_phrases[i - 1].text;
    t.predicate = ordered_phrases[i].text;
    t.object = ordered_phrases[i + 1].text;
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

std::vector<std::string> tokenize_lower(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(util::to_lower(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(util::to_lower(cur));
  return words;
}

}  // namespace

Triplet attach_fallback_predicate(const PhraseSpan& subject, const PhraseSpan& object,
                                  const Sentence& sentence,
                                  const std::vector<std::string>& closed_predicates) {
  const PhraseSpan& left = subject.start_char <= object.start_char ? subject : object;
  const PhraseSpan& right = subject.start_char <= object.start_char ? object : subject;

  std::string between;
  if (left.end_char < right.start_char && right.start_char <= sentence.text.size())
    between = sentence.text.substr(left.end_char, right.start_char - left.end_char);
  const std::vector<std::string> words = tokenize_lower(between);

  std::vector<std::vector<std::string>> entries;
  for (const auto& p : closed_predicates) entries.push_back(tokenize_lower(p));

  std::string predicate = "has";
  bool found = false;
  for (std::size_t pos = 0; pos < words.size() && !found; ++pos) {
    // Longest entry matching at this position wins.
    std::size_t best_len = 0;
    std::size_t best_entry = 0;
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto& entry = entries[e];
      if (entry.empty() || entry.size() > words.size() - pos || entry.size() <= best_len) continue;
      if (std::equal(entry.begin(), entry.end(), words.begin() + pos)) {
        best_len = entry.size();
        best_entry = e;
      }
    }
    if (best_len > 0) {
      predicate = closed_predicates[best_entry];
      found = true;
    }
  }

  Triplet t;
  t.subject = subject.text;
  t.predicate = predicate;
  t.object = object.text;
  return t;
}

std::vector<Triplet> form_consecutive_triplets(const std::vector<PhraseSpan>& ordered_phrases) {
  std::vector<Triplet> out;
  for (std::size_t i = 0; i + 2 < ordered_phrases.size(); i += 3) {
    Triplet t;
    t.subject = ordered_phrases[i].text;
    t.predicate = ordered_phrases[i + 1].text;
    t.object = ordered_phrases[i + 2].text;
    out.push_back(std::move(t));
  }
  return out;
}

bool is_heading(const std::string& text) {
  // Strip leading enumeration like "4", "4.2" or "4.2." plus whitespace.
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t j = i;
  while (j < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
    ++j;
  if (j > i && (j == text.size() || std::isspace(static_cast<unsigned char>(text[j])))) i = j;

  bool has_content = false;
  for (; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::ispunct(c)) return false;
    if (!std::isspace(c)) has_content = true;
  }
  return has_content;
}

std::set<int> select_section_sentences(const corpus::Document& doc,
                                       const std::vector<std::string>& keywords) {
  if (keywords.empty())
    throw corpus::ValidationError("select_section_sentences: keywords must be non-empty");
  std::vector<int> headings;
  std::vector<bool> matched;
  for (const auto& sentence : doc.sentences) {
    if (!is_heading(sentence.text)) continue;
    headings.push_back(sentence.index);
    const std::string lowered = util::to_lower(sentence.text);
    bool hit = false;
    for (const auto& kw : keywords)
      if (lowered.find(util::to_lower(kw)) != std::string::npos) {
        hit = true;
        break;
      }
    matched.push_back(hit);
  }

  std::set<int> out;
  for (std::size_t h = 0; h < headings.size(); ++h) {
    if (!matched[h]) continue;
    const int begin = headings[h] + 1;
    const int end = h + 1 < headings.size() ? headings[h + 1]
                                            : static_cast<int>(doc.sentences.size()) + 1;
    for (int i = begin; i < end; ++i) out.insert(i);
  }
  return out;
}

std::vector<Triplet> fixed_unit_triplets(FixedUnitKind kind,
                                         const std::vector<std::string>& payload,
                                         const RulesConfig& cfg) {
  const FixedUnitStrings& fixed =
      kind == FixedUnitKind::ResearchProblem ? cfg.research_problem : cfg.code;
  const corpus::InfoUnitLabel unit = kind == FixedUnitKind::ResearchProblem
                                         ? corpus::InfoUnitLabel::ResearchProblem
                                         : corpus::InfoUnitLabel::Code;
  std::vector<Triplet> out;
  for (const std::string& object : payload) {
    if (object.empty()) continue;
    out.push_back(Triplet{fixed.subject, fixed.predicate, object, unit});
  }
  return out;
}

std::optional<FixedUnitStrings> infer_fixed_strings(const std::vector<corpus::Document>& docs,
                                                    corpus::InfoUnitLabel unit) {
  std::map<std::string, std::size_t> subjects, predicates;
  for (const auto& doc : docs) {
    if (!doc.gold_triplets) continue;
    auto it = doc.gold_triplets->find(unit);
    if (it == doc.gold_triplets->end()) continue;
    for (const auto& t : it->second) {
      ++subjects[t.subject];
      ++predicates[t.predicate];
    }
  }
  if (subjects.empty()) return std::nullopt;
  auto modal = [](const std::map<std::string, std::size_t>& counts) {
    return std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
             return a.second < b.second;
           })->first;
  };
  return FixedUnitStrings{modal(subjects), modal(predicates)};
}

}  // namespace ckg::tripletform
