#include "ckg/corpus/types.hpp"

namespace ckg::corpus {

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  throw ValidationError("unknown split name: '" + s + "'");
}

const std::vector<InfoUnitLabel>& all_info_units() {
  static const std::vector<InfoUnitLabel> units = {
      InfoUnitLabel::ResearchProblem, InfoUnitLabel::Approach,
      InfoUnitLabel::Results,         InfoUnitLabel::Model,
      InfoUnitLabel::Code,            InfoUnitLabel::Dataset,
      InfoUnitLabel::ExperimentalSetup, InfoUnitLabel::Hyperparameters,
      InfoUnitLabel::Baselines,       InfoUnitLabel::Tasks,
      InfoUnitLabel::Experiments,     InfoUnitLabel::AblationAnalysis,
  };
  return units;
}

const UnitNameMap& default_unit_names() {
  static const UnitNameMap names = {
      {InfoUnitLabel::ResearchProblem, "research-problem"},
      {InfoUnitLabel::Approach, "approach"},
      {InfoUnitLabel::Results, "results"},
      {InfoUnitLabel::Model, "model"},
      {InfoUnitLabel::Code, "code"},
      {InfoUnitLabel::Dataset, "dataset"},
      {InfoUnitLabel::ExperimentalSetup, "experimental-setup"},
      {InfoUnitLabel::Hyperparameters, "hyperparameters"},
      {InfoUnitLabel::Baselines, "baselines"},
      {InfoUnitLabel::Tasks, "tasks"},
      {InfoUnitLabel::Experiments, "experiments"},
      {InfoUnitLabel::AblationAnalysis, "ablation-analysis"},
  };
  return names;
}

std::string unit_name(InfoUnitLabel u, const UnitNameMap& names) {
  auto it = names.find(u);
  if (it == names.end()) throw ValidationError("info unit missing from name map");
  return it->second;
}

std::optional<InfoUnitLabel> unit_from_name(const std::string& name, const UnitNameMap& names) {
  for (const auto& [unit, n] : names)
    if (n == name) return unit;
  return std::nullopt;
}

const Sentence& Document::sentence(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > sentences.size())
    throw ValidationError("document '" + doc_id + "': sentence index " + std::to_string(index) +
                          " out of range (1.." + std::to_string(sentences.size()) + ")");
  return sentences[static_cast<std::size_t>(index) - 1];
}

bool Document::has_gold_sentences() const {
  return !sentences.empty() && sentences.front().gold_contribution.has_value();
}

std::vector<int> Document::gold_contribution_indices() const {
  std::vector<int> out;
  for (const Sentence& s : sentences)
    if (s.gold_contribution.value_or(false)) out.push_back(s.index);
  return out;
}

}  // namespace ckg::corpus
