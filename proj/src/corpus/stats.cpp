#include "ckg/corpus/stats.hpp"

#include <sstream>

namespace ckg::corpus {

SplitStatistics corpus_statistics(const std::vector<Document>& docs) {
  if (docs.empty()) throw ValidationError("corpus_statistics: empty split");
  SplitStatistics st;
  st.documents = docs.size();
  std::size_t total_sentences = 0, total_tokens = 0, total_phrases = 0, total_units = 0;
  std::array<std::size_t, 4> within{};

  for (const Document& doc : docs) {
    if (!doc.has_gold_sentences())
      throw ValidationError("corpus_statistics: doc '" + doc.doc_id +
                            "' has no gold contribution labels");
    if (!doc.gold_phrases)
      throw ValidationError("corpus_statistics: doc '" + doc.doc_id + "' has no gold phrases");
    if (!doc.gold_triplets)
      throw ValidationError("corpus_statistics: doc '" + doc.doc_id + "' has no gold triplets");

    total_sentences += doc.sentences.size();
    for (const Sentence& s : doc.sentences) {
      total_tokens += s.tokens.size();
      st.max_tokens_in_sentence = std::max(st.max_tokens_in_sentence, s.tokens.size());
      if (s.gold_contribution.value_or(false))
        ++st.contribution_sentences;
      else
        ++st.non_contribution_sentences;
      for (std::size_t i = 0; i < SplitStatistics::kLengthThresholds.size(); ++i)
        if (s.tokens.size() <= SplitStatistics::kLengthThresholds[i]) ++within[i];
    }
    total_phrases += doc.gold_phrases->size();
    total_units += doc.gold_triplets->size();
  }

  const double nd = static_cast<double>(docs.size());
  st.avg_sentences_per_doc = static_cast<double>(total_sentences) / nd;
  st.avg_tokens_per_sentence =
      total_sentences == 0 ? 0.0 : static_cast<double>(total_tokens) / total_sentences;
  st.avg_contribution_sentences_per_doc = static_cast<double>(st.contribution_sentences) / nd;
  st.avg_phrases_per_doc = static_cast<double>(total_phrases) / nd;
  st.avg_info_units_per_doc = static_cast<double>(total_units) / nd;
  for (std::size_t i = 0; i < within.size(); ++i)
    st.fraction_within_length[i] =
        total_sentences == 0 ? 0.0 : static_cast<double>(within[i]) / total_sentences;
  return st;
}

std::string format_statistics(const SplitStatistics& s) {
  std::ostringstream os;
  os << "documents                         " << s.documents << "\n"
     << "contribution sentences            " << s.contribution_sentences << "\n"
     << "non-contribution sentences        " << s.non_contribution_sentences << "\n"
     << "avg sentences per doc             " << s.avg_sentences_per_doc << "\n"
     << "avg tokens per sentence           " << s.avg_tokens_per_sentence << "\n"
     << "avg contribution sents per doc    " << s.avg_contribution_sentences_per_doc << "\n"
     << "avg phrases per doc               " << s.avg_phrases_per_doc << "\n"
     << "avg info units per doc            " << s.avg_info_units_per_doc << "\n"
     << "max tokens in sentence            " << s.max_tokens_in_sentence << "\n";
  for (std::size_t i = 0; i < SplitStatistics::kLengthThresholds.size(); ++i)
    os << "sentences <= " << SplitStatistics::kLengthThresholds[i] << " tokens            "
       << s.fraction_within_length[i] * 100.0 << "%\n";
  return os.str();
}

}  // namespace ckg::corpus
