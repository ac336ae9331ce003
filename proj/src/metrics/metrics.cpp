#include "ckg/metrics/metrics.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "ckg/util/text.hpp"

namespace ckg::metrics {

using corpus::Document;
using corpus::DocPredictions;
using corpus::InfoUnitLabel;
using nlohmann::json;

Prf prf_from_counts(const Counts& c) {
  Prf p;
  const std::size_t pred_total = c.tp + c.fp;
  const std::size_t gold_total = c.tp + c.fn;
  p.precision = pred_total == 0 ? 0.0 : static_cast<double>(c.tp) / pred_total;
  p.recall = gold_total == 0 ? 0.0 : static_cast<double>(c.tp) / gold_total;
  p.f1 = (p.precision + p.recall) == 0.0
             ? 0.0
             : 2.0 * p.precision * p.recall / (p.precision + p.recall);
  return p;
}

std::string phase_name(Phase p) {
  switch (p) {
    case Phase::EndToEnd: return "end-to-end";
    case Phase::GoldA: return "gold-a";
    case Phase::GoldAB: return "gold-ab";
  }
  return "end-to-end";
}

Phase phase_from_name(const std::string& s) {
  if (s == "end-to-end") return Phase::EndToEnd;
  if (s == "gold-a") return Phase::GoldA;
  if (s == "gold-ab") return Phase::GoldAB;
  throw std::invalid_argument("unknown phase: '" + s + "' (end-to-end, gold-a, gold-ab)");
}

namespace {

using SentenceItem = std::pair<std::string, int>;
using PhraseItem = std::tuple<std::string, int, std::size_t, std::size_t, std::string>;
using UnitItem = std::pair<std::string, InfoUnitLabel>;
using TripletItem = std::tuple<std::string, InfoUnitLabel, std::string, std::string, std::string>;

}  // namespace

EvalReport evaluate_phase(const std::vector<DocPredictions>& pred,
                          const std::vector<Document>& gold, Phase phase) {
  std::map<std::string, const Document*> gold_by_id;
  for (const auto& d : gold) gold_by_id[d.doc_id] = &d;
  std::map<std::string, const DocPredictions*> pred_by_id;
  for (const auto& p : pred) {
    if (!gold_by_id.count(p.doc_id))
      throw corpus::ValidationError("evaluate_phase: predicted doc '" + p.doc_id +
                                    "' not present in gold corpus");
    pred_by_id[p.doc_id] = &p;
  }

  EvalReport report;
  report.phase = phase;

  std::set<SentenceItem> pred_sents, gold_sents;
  std::set<PhraseItem> pred_phrases, gold_phrases;
  std::set<UnitItem> pred_units, gold_units;
  std::set<TripletItem> pred_triplets, gold_triplets;

  for (const auto& d : gold) {
    const DocPredictions* p = nullptr;
    auto it = pred_by_id.find(d.doc_id);
    if (it == pred_by_id.end())
      report.warnings.push_back("doc '" + d.doc_id + "' has no predictions; scored as empty");
    else
      p = it->second;

    if (d.has_gold_sentences())
      for (int id : d.gold_contribution_indices()) gold_sents.emplace(d.doc_id, id);
    if (p)
      for (int id : p->sentences) pred_sents.emplace(d.doc_id, id);

    if (d.gold_phrases)
      for (const auto& ph : *d.gold_phrases)
        gold_phrases.emplace(d.doc_id, ph.sentence_index, ph.start_char, ph.end_char,
                             util::normalize_whitespace(ph.text));
    if (p)
      for (const auto& ph : p->phrases)
        pred_phrases.emplace(d.doc_id, ph.sentence_index, ph.start_char, ph.end_char,
                             util::normalize_whitespace(ph.text));

    if (d.gold_triplets) {
      for (const auto& [unit, list] : *d.gold_triplets) {
        gold_units.emplace(d.doc_id, unit);
        report.gold_triplets_per_unit[unit] += list.size();
        for (const auto& t : list)
          gold_triplets.emplace(d.doc_id, unit, util::normalize_whitespace(t.subject),
                                util::normalize_whitespace(t.predicate),
                                util::normalize_whitespace(t.object));
      }
    }
    if (p) {
      for (const auto& [unit, list] : p->triplets) {
        pred_units.emplace(d.doc_id, unit);
        report.pred_triplets_per_unit[unit] += list.size();
        for (const auto& t : list)
          pred_triplets.emplace(d.doc_id, unit, util::normalize_whitespace(t.subject),
                                util::normalize_whitespace(t.predicate),
                                util::normalize_whitespace(t.object));
      }
    }
  }

  report.sentence = prf1(pred_sents, gold_sents);
  report.phrase = prf1(pred_phrases, gold_phrases);
  report.iu = prf1(pred_units, gold_units);
  report.triplet = prf1(pred_triplets, gold_triplets);

  // Gold-substituted stages score exactly 1.
  if (phase == Phase::GoldA || phase == Phase::GoldAB) report.sentence = Prf{1.0, 1.0, 1.0};
  if (phase == Phase::GoldAB) report.phrase = Prf{1.0, 1.0, 1.0};

  report.average_f1 =
      (report.sentence.f1 + report.phrase.f1 + report.iu.f1 + report.triplet.f1) / 4.0;
  return report;
}

std::string format_report(const EvalReport& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  auto row = [&](const char* name, const Prf& p) {
    os << name << "  precision " << p.precision << "  recall " << p.recall << "  f1 " << p.f1
       << "\n";
  };
  os << "phase      " << phase_name(r.phase) << "\n";
  row("sentences ", r.sentence);
  row("phrases   ", r.phrase);
  row("info-units", r.iu);
  row("triplets  ", r.triplet);
  os << "average f1 " << r.average_f1 << "\n";
  if (!r.gold_triplets_per_unit.empty()) {
    os << "gold triplets per unit:";
    for (const auto& [unit, n] : r.gold_triplets_per_unit)
      os << " " << corpus::unit_name(unit) << "=" << n;
    os << "\n";
  }
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  return os.str();
}

std::string report_to_json(const EvalReport& r) {
  auto prf = [](const Prf& p) {
    return json{{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
  };
  json j = {
      {"phase", phase_name(r.phase)}, {"sentences", prf(r.sentence)},
      {"phrases", prf(r.phrase)},     {"info_units", prf(r.iu)},
      {"triplets", prf(r.triplet)},   {"average_f1", r.average_f1},
  };
  json per_unit = json::object();
  for (const auto& [unit, n] : r.gold_triplets_per_unit)
    per_unit[corpus::unit_name(unit)] = {{"gold", n},
                                         {"pred", r.pred_triplets_per_unit.count(unit)
                                                      ? r.pred_triplets_per_unit.at(unit)
                                                      : 0}};
  for (const auto& [unit, n] : r.pred_triplets_per_unit)
    if (!r.gold_triplets_per_unit.count(unit))
      per_unit[corpus::unit_name(unit)] = {{"gold", 0}, {"pred", n}};
  j["triplets_per_unit"] = per_unit;
  j["warnings"] = r.warnings;
  return j.dump(2);
}

}  // namespace ckg::metrics
