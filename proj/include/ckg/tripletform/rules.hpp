#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ckg/corpus/types.hpp"

namespace ckg::tripletform {

// Fallback relations used when no predicate phrase exists between a subject
// and an object; order matters only for documentation, matching is by
// position in the sentence with longest-match tie-breaking.
std::vector<std::string> default_closed_predicates();

struct FixedUnitStrings {
  std::string subject;
  std::string predicate;
};

struct RulesConfig {
  std::vector<std::string> closed_predicates = default_closed_predicates();
  std::vector<std::string> baselines_keywords{"baseline", "comp"};
  std::vector<std::string> ablation_keywords{"ablation", "analysis"};
  // Fixed triplet frames; calibrate against gold training files when the
  // released corpus is available (see infer_fixed_strings).
  FixedUnitStrings research_problem{"Contribution", "has research problem"};
  FixedUnitStrings code{"Contribution", "has source code"};
};

// Phrases of one sentence sorted by start offset.
std::vector<corpus::PhraseSpan> sentence_phrases_in_order(
    const std::vector<corpus::PhraseSpan>& phrases, int sentence_index);

// For every predicate-flagged phrase with both neighbours, emit
// (previous, predicate, next). Edge predicates are skipped.
std::vector<corpus::Triplet> form_predicate_triplets(
    const std::vector<corpus::PhraseSpan>& ordered_phrases,
    const std::vector<bool>& predicate_flags);

// Closed-set predicate search in the sentence text between the two phrases:
// earliest token-aligned match wins, longest entry on position ties, "has"
// when nothing matches.
corpus::Triplet attach_fallback_predicate(const corpus::PhraseSpan& subject,
                                          const corpus::PhraseSpan& object,
                                          const corpus::Sentence& sentence,
                                          const std::vector<std::string>& closed_predicates =
                                              default_closed_predicates());

// Disjoint windows of three consecutive phrases; the remainder is dropped.
std::vector<corpus::Triplet> form_consecutive_triplets(
    const std::vector<corpus::PhraseSpan>& ordered_phrases);

// Headings are sentences with no punctuation after stripping leading section
// numerals; returns all sentences strictly between a keyword-matched heading
// and the next heading (keyword-matched or not), or the document end.
std::set<int> select_section_sentences(const corpus::Document& doc,
                                       const std::vector<std::string>& keywords);

bool is_heading(const std::string& text);

enum class FixedUnitKind { ResearchProblem, Code };

// Research-problem objects / code URLs wrapped into fixed-frame triplets.
std::vector<corpus::Triplet> fixed_unit_triplets(FixedUnitKind kind,
                                                 const std::vector<std::string>& payload,
                                                 const RulesConfig& cfg = {});

// Modal fixed subject/predicate read from gold triplet files of a training
// split; empty when the unit has no gold triplets.
std::optional<FixedUnitStrings> infer_fixed_strings(const std::vector<corpus::Document>& docs,
                                                    corpus::InfoUnitLabel unit);

}  // namespace ckg::tripletform
