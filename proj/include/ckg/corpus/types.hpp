#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ckg::corpus {

struct LoadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Split { Train, Dev, Test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct Token {
  std::string surface;
  std::size_t start_char = 0;  // within-sentence, 0-based
  std::size_t end_char = 0;    // exclusive
};

struct Sentence {
  int index = 0;  // 1-based position in the document
  std::string text;
  std::vector<Token> tokens;
  std::optional<bool> gold_contribution;
};

struct PhraseSpan {
  int sentence_index = 0;
  std::size_t start_char = 0;
  std::size_t end_char = 0;
  std::string text;

  friend bool operator==(const PhraseSpan&, const PhraseSpan&) = default;
  friend auto operator<=>(const PhraseSpan& a, const PhraseSpan& b) {
    return std::tie(a.sentence_index, a.start_char, a.end_char, a.text) <=>
           std::tie(b.sentence_index, b.start_char, b.end_char, b.text);
  }
};

enum class InfoUnitLabel {
  ResearchProblem,
  Approach,
  Results,
  Model,
  Code,
  Dataset,
  ExperimentalSetup,
  Hyperparameters,
  Baselines,
  Tasks,
  Experiments,
  AblationAnalysis,
};

inline constexpr int kInfoUnitCount = 12;
const std::vector<InfoUnitLabel>& all_info_units();

// Serialization names used for triplet file names; overridable via config.
using UnitNameMap = std::map<InfoUnitLabel, std::string>;
const UnitNameMap& default_unit_names();
std::string unit_name(InfoUnitLabel u, const UnitNameMap& names = default_unit_names());
std::optional<InfoUnitLabel> unit_from_name(const std::string& name,
                                            const UnitNameMap& names = default_unit_names());

struct Triplet {
  std::string subject;
  std::string predicate;
  std::string object;
  InfoUnitLabel unit = InfoUnitLabel::ResearchProblem;

  friend bool operator==(const Triplet&, const Triplet&) = default;
  friend auto operator<=>(const Triplet& a, const Triplet& b) {
    return std::tie(a.unit, a.subject, a.predicate, a.object) <=>
           std::tie(b.unit, b.subject, b.predicate, b.object);
  }
};

using TripletMap = std::map<InfoUnitLabel, std::vector<Triplet>>;

struct Document {
  std::string doc_id;
  std::vector<Sentence> sentences;
  Split split = Split::Train;

  std::optional<std::vector<PhraseSpan>> gold_phrases;
  std::optional<TripletMap> gold_triplets;

  const Sentence& sentence(int index) const;  // 1-based, throws on out-of-range
  bool has_gold_sentences() const;
  std::vector<int> gold_contribution_indices() const;
};

}  // namespace ckg::corpus
