#pragma once

#include <filesystem>
#include <set>
#include <vector>

#include "ckg/corpus/types.hpp"

namespace ckg::corpus {

// On-disk layout (documented in the README):
//   <root>/manifest.txt            doc_id<TAB>split, one per line
//   <root>/<doc_id>/sentences.txt  pre-tokenized sentence per line
//   <root>/<doc_id>/contribution-sentences.txt   gold sentence ids (optional)
//   <root>/<doc_id>/phrases.txt    sent<TAB>start<TAB>end<TAB>text (optional)
//   <root>/<doc_id>/triples/<unit>.txt  (subject||predicate||object) (optional)
// Prediction directories share the per-document layout minus sentences.txt.

struct IoConfig {
  std::string triplet_separator = "||";
  UnitNameMap unit_names = default_unit_names();
};

Document load_document(const std::filesystem::path& doc_dir, const IoConfig& cfg = {});

std::vector<Document> load_split(const std::filesystem::path& root, Split split,
                                 const IoConfig& cfg = {});

// Submission-format output for one document.
void write_predictions(const Document& doc, const std::set<int>& sentences,
                       const std::vector<PhraseSpan>& phrases, const TripletMap& triplets,
                       const std::filesystem::path& out_dir, const IoConfig& cfg = {});

struct DocPredictions {
  std::string doc_id;
  std::set<int> sentences;
  std::vector<PhraseSpan> phrases;
  TripletMap triplets;
};

// Parses a prediction directory written by write_predictions. Missing files
// yield empty members.
DocPredictions parse_predictions(const std::filesystem::path& doc_dir, const IoConfig& cfg = {});

// Individual file parsers (also used for gold annotation files).
std::vector<int> parse_sentence_ids(const std::filesystem::path& file);
std::vector<PhraseSpan> parse_phrase_file(const std::filesystem::path& file);
std::vector<Triplet> parse_triplet_file(const std::filesystem::path& file, InfoUnitLabel unit,
                                        const std::string& separator);

}  // namespace ckg::corpus
