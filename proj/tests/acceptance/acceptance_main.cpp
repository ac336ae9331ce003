// Acceptance suite: prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero if any hard criterion fails. The dataset-statistics criterion
// needs the released corpus (point CONTRIBKG_CORPUS_ROOT at it); the
// model-quality targets need full-scale training and are reported, not gated.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ckg/corpus/stats.hpp"
#include "ckg/crf/linear_chain.hpp"
#include "ckg/iupredict/heuristics.hpp"
#include "ckg/metrics/metrics.hpp"
#include "ckg/pipeline/pipeline.hpp"
#include "ckg/phrasecrf/biluo.hpp"
#include "ckg/phrasecrf/model.hpp"
#include "ckg/tripletform/rules.hpp"
#include "../synthetic_corpus.hpp"

namespace fs = std::filesystem;
using namespace ckg;
using num::Matrix;
using phrasecrf::BiluoTag;
using phrasecrf::CrfParams;
using phrasecrf::TagSequence;

namespace {

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Pass;
  std::string detail;
};

struct Check {
  const char* fmt = "%-28s %s %s\n";
  int failures = 0;

  void run(const std::string& name, const std::function<Outcome()>& fn) {
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = out.kind == Outcome::Pass ? "PASS"
                      : out.kind == Outcome::Fail ? "FAIL"
                                                  : "SKIP";
    std::printf("%s %-26s %s\n", tag, name.c_str(), out.detail.c_str());
    std::fflush(stdout);
    if (out.kind == Outcome::Fail) ++failures;
  }
};

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(r, c);
  for (double& x : m.flat()) x = dist(rng);
  return m;
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename Fn>
void for_each_sequence(std::size_t n, std::size_t l, Fn&& fn) {
  std::vector<int> y(n, 0);
  while (true) {
    fn(y);
    std::size_t i = n;
    while (i > 0) {
      if (++y[i - 1] < static_cast<int>(l)) break;
      y[i - 1] = 0;
      --i;
    }
    if (i == 0) return;
  }
}

double enum_path_score(const Matrix& z, const Matrix& t, const std::vector<int>& y) {
  const std::size_t l = z.cols();
  double s = t(l, y.front()) + z(0, y.front());
  for (std::size_t i = 1; i < y.size(); ++i) s += t(y[i - 1], y[i]) + z(i, y[i]);
  return s + t(y.back(), l + 1);
}

// --- criterion 1 -----------------------------------------------------------
Outcome crf_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  const std::size_t l = phrasecrf::kTagCount;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = len(rng);
    const Matrix z = random_matrix(n, l, rng);
    const Matrix t = random_matrix(l + 2, l + 2, rng);

    double max_score = -std::numeric_limits<double>::infinity();
    std::vector<int> best;
    for_each_sequence(n, l, [&](const std::vector<int>& y) {
      const double s = enum_path_score(z, t, y);
      if (s > max_score) {
        max_score = s;
        best = y;
      }
    });
    double sum = 0.0;
    for_each_sequence(n, l, [&](const std::vector<int>& y) {
      sum += std::exp(enum_path_score(z, t, y) - max_score);
    });
    const double enum_log_z = max_score + std::log(sum);

    if (!close_rel(crf::log_partition(z, t), enum_log_z, 1e-9))
      return {Outcome::Fail, "log-partition mismatch at rep " + std::to_string(rep)};
    if (crf::viterbi(z, t) != best)
      return {Outcome::Fail, "viterbi mismatch at rep " + std::to_string(rep)};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 10.0) return {Outcome::Fail, "took " + std::to_string(secs) + "s (budget 10s)"};
  char buf[96];
  std::snprintf(buf, sizeof buf, "200 instances, %.1e rel tol, %.2fs", 1e-9, secs);
  return {Outcome::Pass, buf};
}

// --- criterion 2 -----------------------------------------------------------
Outcome crf_gradient_check() {
  std::mt19937_64 rng(2025);
  const std::size_t l = phrasecrf::kTagCount;
  std::uniform_int_distribution<int> tag(0, static_cast<int>(l) - 1);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix z = random_matrix(3, l, rng);
    CrfParams params;
    params.transitions = random_matrix(l + 2, l + 2, rng);
    params.l2_weight = rep % 2 == 0 ? 0.0 : 0.25;
    TagSequence y(3);
    for (auto& v : y) v = static_cast<BiluoTag>(tag(rng));

    std::vector<Matrix> dz;
    Matrix dt;
    phrasecrf::crf_training_loss_with_grads({{z, y}}, params, dz, dt);

    const double h = 1e-6;
    for (std::size_t i = 0; i < z.size(); ++i) {
      Matrix zp = z, zm = z;
      zp.flat()[i] += h;
      zm.flat()[i] -= h;
      const double fd = (phrasecrf::crf_training_loss({{zp, y}}, params) -
                         phrasecrf::crf_training_loss({{zm, y}}, params)) /
                        (2 * h);
      if (!close_rel(dz[0].flat()[i], fd, 1e-5))
        return {Outcome::Fail, "emission gradient mismatch at rep " + std::to_string(rep)};
    }
    for (std::size_t i = 0; i < params.transitions.size(); ++i) {
      CrfParams pp = params, pm = params;
      pp.transitions.flat()[i] += h;
      pm.transitions.flat()[i] -= h;
      const double fd = (phrasecrf::crf_training_loss({{z, y}}, pp) -
                         phrasecrf::crf_training_loss({{z, y}}, pm)) /
                        (2 * h);
      if (!close_rel(dt.flat()[i], fd, 1e-5))
        return {Outcome::Fail, "transition gradient mismatch at rep " + std::to_string(rep)};
    }
  }
  return {Outcome::Pass, "20 instances, emissions + transitions, 1e-5 rel tol"};
}

// --- criterion 3 -----------------------------------------------------------
Outcome biluo_round_trip() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<std::size_t> n_tokens(1, 14);
  std::uniform_int_distribution<int> coin(0, 3), tag(0, 4);
  std::uniform_int_distribution<std::size_t> span_len(1, 3);

  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = n_tokens(rng);
    corpus::Sentence s;
    s.index = 1;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string w = "w" + std::to_string(i);
      if (!s.text.empty()) {
        s.text += " ";
        ++pos;
      }
      s.tokens.push_back(corpus::Token{w, pos, pos + w.size()});
      s.text += w;
      pos += w.size();
    }
    std::vector<corpus::PhraseSpan> spans;
    std::size_t i = 0;
    while (i < n) {
      if (coin(rng) == 0) {
        const std::size_t len = std::min(span_len(rng), n - i);
        corpus::PhraseSpan p;
        p.sentence_index = 1;
        p.start_char = s.tokens[i].start_char;
        p.end_char = s.tokens[i + len - 1].end_char;
        p.text = s.text.substr(p.start_char, p.end_char - p.start_char);
        spans.push_back(p);
        i += len;
      } else {
        ++i;
      }
    }
    const TagSequence tags = phrasecrf::biluo_encode(s, spans);
    if (phrasecrf::biluo_decode(s, tags) != spans)
      return {Outcome::Fail, "encode->decode mismatch at rep " + std::to_string(rep)};

    TagSequence noise(n);
    for (auto& t : noise) t = static_cast<BiluoTag>(tag(rng));
    if (!phrasecrf::is_valid_biluo(phrasecrf::repair_biluo(noise)))
      return {Outcome::Fail, "repair produced invalid BILUO at rep " + std::to_string(rep)};
  }
  return {Outcome::Pass, "1000 span sets round-trip; repair always valid"};
}

// --- criterion 4 -----------------------------------------------------------
Outcome scorer_fixtures() {
  const auto half = metrics::prf1(std::set<int>{1, 2}, std::set<int>{2, 3});
  if (half.precision != 0.5 || half.recall != 0.5 || half.f1 != 0.5)
    return {Outcome::Fail, "expected (0.5, 0.5, 0.5)"};
  const auto zero = metrics::prf1(std::set<int>{}, std::set<int>{1});
  if (zero.precision != 0.0 || zero.recall != 0.0 || zero.f1 != 0.0)
    return {Outcome::Fail, "zero-denominator case must yield zeros"};
  const auto empty_gold = metrics::prf1(std::set<int>{1}, std::set<int>{});
  if (empty_gold.recall != 0.0 || empty_gold.f1 != 0.0)
    return {Outcome::Fail, "empty-gold case must yield zeros"};

  // Four-way average arithmetic on constructed reports.
  corpus::Document d;
  d.doc_id = "doc";
  corpus::Sentence s;
  s.index = 1;
  s.text = "a b";
  s.tokens = {{"a", 0, 1}, {"b", 2, 3}};
  s.gold_contribution = true;
  d.sentences.push_back(s);
  corpus::PhraseSpan p{1, 0, 1, "a"};
  d.gold_phrases = std::vector<corpus::PhraseSpan>{p};
  corpus::TripletMap gold_triplets;
  gold_triplets[corpus::InfoUnitLabel::Model] = {
      {"a", "has", "b", corpus::InfoUnitLabel::Model}};
  d.gold_triplets = gold_triplets;

  corpus::DocPredictions pred;
  pred.doc_id = "doc";
  pred.sentences = {1};
  pred.phrases = {p};
  const auto report = metrics::evaluate_phase({pred}, {d}, metrics::Phase::EndToEnd);
  const double expect = (1.0 + 1.0 + 0.0 + 0.0) / 4.0;
  if (report.average_f1 != expect)
    return {Outcome::Fail, "four-way average expected " + std::to_string(expect)};
  return {Outcome::Pass, "(0.5,0.5,0.5), zero denominators, exact averaging"};
}

// --- criterion 5 -----------------------------------------------------------
Outcome heuristic_suite() {
  // 40-sentence synthetic document; expected outputs enumerated by hand.
  std::vector<std::string> lines(40, "plain filler sentence , with punctuation .");
  lines[1] = "we solve named entity recognition .";              // s2
  lines[2] = "transformers and crfs work well .";                // s3
  lines[4] = "Our code lives at https://github.com/org/repo .";  // s5
  lines[5] = "download data from http://data.site .";            // s6
  lines[6] = "run ftp://files.host/x because our scripts help .";// s7
  lines[9] = "Baselines";                                        // s10 heading
  lines[10] = "baseline one beats baseline two .";               // s11
  lines[12] = "4.2 Ablation Analysis";                           // s13 heading
  lines[13] = "removing attention drops score .";                // s14
  lines[14] = "5 Conclusion";                                    // s15 heading
  lines[19] = "the model for parsing helps .";                   // s20
  lines[20] = "phrase one links phrase two .";                   // s21
  lines[29] = "an edge case appears here .";                     // s30
  lines[30] = "late single phrase here .";                       // s31

  corpus::Document doc;
  doc.doc_id = "synthetic";
  for (int i = 0; i < 40; ++i) {
    corpus::Sentence s;
    s.index = i + 1;
    s.text = lines[i];
    std::size_t pos = 0;
    while (pos < s.text.size()) {
      while (pos < s.text.size() && s.text[pos] == ' ') ++pos;
      if (pos >= s.text.size()) break;
      std::size_t start = pos;
      while (pos < s.text.size() && s.text[pos] != ' ') ++pos;
      s.tokens.push_back(corpus::Token{s.text.substr(start, pos - start), start, pos});
    }
    doc.sentences.push_back(std::move(s));
  }

  auto phrase = [&](int sent, const std::string& text) {
    const std::string& hay = lines[sent - 1];
    corpus::PhraseSpan p;
    p.sentence_index = sent;
    p.start_char = hay.find(text);
    p.end_char = p.start_char + text.size();
    p.text = text;
    return p;
  };
  std::vector<corpus::PhraseSpan> phrases = {
      phrase(2, "named entity recognition"),
      phrase(3, "transformers"), phrase(3, "crfs"),
      phrase(11, "baseline one"), phrase(11, "beats"), phrase(11, "baseline two"),
      phrase(14, "removing attention"), phrase(14, "drops"), phrase(14, "score"),
      phrase(20, "model"), phrase(20, "parsing"),
      phrase(21, "phrase one"), phrase(21, "links"), phrase(21, "phrase two"),
      phrase(30, "edge case"),
      phrase(31, "late single"),
  };

  // First-thirty-lines rule: exactly the single-phrase sentences 2 and 30.
  const auto rp = iupredict::detect_research_problem(doc, phrases);
  if (rp.size() != 2 || rp[0].text != "named entity recognition" || rp[1].text != "edge case")
    return {Outcome::Fail, "research-problem selection mismatch"};

  // URL + our/code rule: sentences 5 and 7, with extracted URLs.
  const auto urls = iupredict::detect_code_urls(doc);
  if (urls.size() != 2 || urls[0] != std::pair<int, std::string>{5, "https://github.com/org/repo"} ||
      urls[1] != std::pair<int, std::string>{7, "ftp://files.host/x"})
    return {Outcome::Fail, "code-URL selection mismatch"};

  // Heading-section selection.
  const auto baselines = tripletform::select_section_sentences(doc, {"baseline", "comp"});
  if (baselines != std::set<int>{11, 12})
    return {Outcome::Fail, "baselines section mismatch"};
  const auto ablation = tripletform::select_section_sentences(doc, {"ablation", "analysis"});
  if (ablation != std::set<int>{14}) return {Outcome::Fail, "ablation section mismatch"};

  // Consecutive-window rule in the baselines section.
  const auto window = tripletform::form_consecutive_triplets(
      tripletform::sentence_phrases_in_order(phrases, 11));
  if (window.size() != 1 || window[0].subject != "baseline one" ||
      window[0].predicate != "beats" || window[0].object != "baseline two")
    return {Outcome::Fail, "consecutive-window mismatch"};

  // Predicate-neighbour rule.
  const auto ordered = tripletform::sentence_phrases_in_order(phrases, 21);
  const auto neighbour = tripletform::form_predicate_triplets(ordered, {false, true, false});
  if (neighbour.size() != 1 || neighbour[0].subject != "phrase one" ||
      neighbour[0].predicate != "links" || neighbour[0].object != "phrase two")
    return {Outcome::Fail, "predicate-neighbour mismatch"};

  // Closed-set fallback predicate.
  const auto fallback = tripletform::attach_fallback_predicate(
      phrase(20, "model"), phrase(20, "parsing"), doc.sentences[19]);
  if (fallback.predicate != "for") return {Outcome::Fail, "fallback predicate mismatch"};

  return {Outcome::Pass, "40-sentence document, all rules as enumerated"};
}

// --- criterion 6 -----------------------------------------------------------
Outcome dataset_statistics() {
  const char* root = std::getenv("CONTRIBKG_CORPUS_ROOT");
  if (!root || !fs::is_directory(root))
    return {Outcome::Skip,
            "released corpus not present; set CONTRIBKG_CORPUS_ROOT to run"};
  const auto docs = corpus::load_split(root, corpus::Split::Train);
  const auto st = corpus::corpus_statistics(docs);
  auto fail = [](const std::string& what) { return Outcome{Outcome::Fail, what}; };
  if (st.documents != 237) return fail("documents: got " + std::to_string(st.documents));
  if (st.contribution_sentences != 5096)
    return fail("contribution sentences: got " + std::to_string(st.contribution_sentences));
  if (st.non_contribution_sentences != 50105)
    return fail("non-contribution sentences: got " +
                std::to_string(st.non_contribution_sentences));
  if (std::abs(st.avg_sentences_per_doc - 232.915) > 0.0005)
    return fail("avg sentences/doc: got " + std::to_string(st.avg_sentences_per_doc));
  if (std::abs(st.fraction_within_length[1] - 0.9974) > 0.00005)
    return fail("<=100-token coverage: got " + std::to_string(st.fraction_within_length[1]));
  return {Outcome::Pass, "237 docs, 5096/50105 sentences, 232.915 avg, 99.74% <= 100"};
}

// --- criterion 7 -----------------------------------------------------------
Outcome model_quality_targets() {
  return {Outcome::Skip,
          "soft targets (dev F1 0.451/0.480, test avg 0.3783, gold-ab 0.7600) need the "
          "released corpus and full-scale fine-tuning; reported, not gated"};
}

// --- criterion 8 -----------------------------------------------------------
Outcome end_to_end_smoke() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path root = fs::temp_directory_path() / "ckg_acceptance_smoke";
  fs::remove_all(root);
  const fs::path corpus_root = root / "corpus";
  const fs::path ckpt = root / "ckpt";
  testing::write_synthetic_corpus(corpus_root);
  encoder::Encoder::write_tiny_checkpoint(ckpt, 71, 16, 1, 2, 32, 128);

  pipeline::PipelineConfig cfg = testing::tiny_pipeline_config(corpus_root, ckpt, root / "work");
  cfg.sentence_train.epochs = 2;
  cfg.phrase_train.epochs = 3;
  cfg.iu_train.epochs = 3;
  cfg.predicate_train.epochs = 4;
  cfg.triplet_train.epochs = 3;
  pipeline::train_sentence_stage(cfg);
  pipeline::train_phrase_stage(cfg);
  pipeline::train_unit_stage(cfg);

  cfg.phase = metrics::Phase::EndToEnd;
  const fs::path out = pipeline::run_pipeline(cfg, corpus::Split::Train);

  // Outputs must parse back and respect the format invariants.
  const auto gold = corpus::load_split(corpus_root, corpus::Split::Train);
  for (const auto& doc : gold) {
    const auto preds = corpus::parse_predictions(out / doc.doc_id);
    for (int sid : preds.sentences)
      if (sid < 1 || sid > static_cast<int>(doc.sentences.size()))
        return {Outcome::Fail, "sentence id out of range in " + doc.doc_id};
    for (const auto& p : preds.phrases) {
      const auto& s = doc.sentence(p.sentence_index);
      if (p.text != s.text.substr(p.start_char, p.end_char - p.start_char))
        return {Outcome::Fail, "phrase offsets do not round-trip in " + doc.doc_id};
    }
    for (const auto& [unit, list] : preds.triplets)
      for (const auto& t : list)
        if (t.subject.empty() || t.predicate.empty() || t.object.empty())
          return {Outcome::Fail, "empty triplet field in " + doc.doc_id};
  }
  const auto report = pipeline::evaluate_command(out, corpus_root, corpus::Split::Train,
                                                 metrics::Phase::EndToEnd, cfg.io);
  (void)report;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= 60.0)
    return {Outcome::Fail, "took " + std::to_string(secs) + "s (budget 60s)"};
  char buf[96];
  std::snprintf(buf, sizeof buf, "train + predict + evaluate on 2 docs in %.1fs", secs);
  return {Outcome::Pass, buf};
}

}  // namespace

int main() {
  Check check;
  check.run("crf-oracle-equivalence", crf_oracle_equivalence);
  check.run("crf-gradient-check", crf_gradient_check);
  check.run("biluo-round-trip", biluo_round_trip);
  check.run("scorer-fixtures", scorer_fixtures);
  check.run("heuristic-suite", heuristic_suite);
  check.run("dataset-statistics", dataset_statistics);
  check.run("model-quality-targets", model_quality_targets);
  check.run("end-to-end-smoke", end_to_end_smoke);
  if (check.failures > 0) {
    std::printf("%d criterion(s) failed\n", check.failures);
    return 1;
  }
  return 0;
}
