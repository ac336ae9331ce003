#pragma once

#include <array>
#include <vector>

#include "ckg/corpus/types.hpp"

namespace ckg::corpus {

struct SplitStatistics {
  std::size_t documents = 0;
  std::size_t contribution_sentences = 0;
  std::size_t non_contribution_sentences = 0;
  double avg_sentences_per_doc = 0.0;
  double avg_tokens_per_sentence = 0.0;
  double avg_contribution_sentences_per_doc = 0.0;
  double avg_phrases_per_doc = 0.0;
  double avg_info_units_per_doc = 0.0;
  std::size_t max_tokens_in_sentence = 0;

  static constexpr std::array<std::size_t, 4> kLengthThresholds{50, 100, 150, 200};
  // Fraction of sentences whose token count is <= the matching threshold.
  std::array<double, 4> fraction_within_length{};
};

// Requires gold contribution labels, phrases and triplets on every document.
SplitStatistics corpus_statistics(const std::vector<Document>& docs);

std::string format_statistics(const SplitStatistics& s);

}  // namespace ckg::corpus
