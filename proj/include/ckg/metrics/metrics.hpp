#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ckg/corpus/io.hpp"
#include "ckg/corpus/types.hpp"

namespace ckg::metrics {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Micro counts accumulated across documents before computing P/R/F1.
struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
  void add(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
  }
};

Prf prf_from_counts(const Counts& c);

template <typename T>
Counts match_counts(const std::set<T>& pred, const std::set<T>& gold) {
  Counts c;
  for (const T& x : pred) (gold.count(x) ? c.tp : c.fp)++;
  for (const T& x : gold)
    if (!pred.count(x)) ++c.fn;
  return c;
}

// Zero denominators yield zero precision/recall/f1.
template <typename T>
Prf prf1(const std::set<T>& pred, const std::set<T>& gold) {
  return prf_from_counts(match_counts(pred, gold));
}

enum class Phase { EndToEnd, GoldA, GoldAB };
std::string phase_name(Phase p);
Phase phase_from_name(const std::string& s);

struct EvalReport {
  Phase phase = Phase::EndToEnd;
  Prf sentence, phrase, iu, triplet;
  double average_f1 = 0.0;
  // Gold/predicted triplet counts per unit (class-imbalance context).
  std::map<corpus::InfoUnitLabel, std::size_t> gold_triplets_per_unit;
  std::map<corpus::InfoUnitLabel, std::size_t> pred_triplets_per_unit;
  std::vector<std::string> warnings;
};

// Predictions are matched to gold documents by doc_id. Every predicted
// doc_id must exist in gold; gold documents without predictions score as
// empty predictions (with a warning). In GoldA the sentence row reports
// 1.00; in GoldAB both sentence and phrase rows do.
EvalReport evaluate_phase(const std::vector<corpus::DocPredictions>& pred,
                          const std::vector<corpus::Document>& gold, Phase phase);

std::string format_report(const EvalReport& r);
std::string report_to_json(const EvalReport& r);

}  // namespace ckg::metrics
