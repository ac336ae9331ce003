#include "ckg/pipeline/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "ckg/iupredict/heuristics.hpp"
#include "ckg/tripletform/rules.hpp"

namespace ckg::pipeline {

namespace fs = std::filesystem;
using corpus::Document;
using corpus::InfoUnitLabel;
using corpus::PhraseSpan;
using corpus::Triplet;
using nlohmann::json;

namespace {

encoder::Encoder load_encoder(const PipelineConfig& cfg, std::size_t max_token_length) {
  encoder::EncoderConfig ecfg = cfg.encoder;
  ecfg.max_token_length = max_token_length;
  return encoder::Encoder::load(ecfg);
}

std::vector<Document> load_train_docs(const PipelineConfig& cfg) {
  return corpus::load_split(cfg.paths.corpus_root, corpus::Split::Train, cfg.io);
}

void require_checkpoint(const fs::path& dir, const std::string& stage,
                        const std::string& command) {
  if (!fs::exists(dir / "config.json"))
    throw std::runtime_error("missing " + stage + " checkpoint at '" + dir.string() +
                             "'; run `contribkg " + command + "` first");
}

// Fixed-frame strings calibrated from the gold training files; written by
// train_unit_stage and preferred over the config defaults at predict time.
void write_calibrated_rules(const PipelineConfig& cfg,
                            const std::vector<Document>& train_docs) {
  json j = json::object();
  if (auto rp = tripletform::infer_fixed_strings(train_docs, InfoUnitLabel::ResearchProblem))
    j["research_problem"] = {{"subject", rp->subject}, {"predicate", rp->predicate}};
  if (auto code = tripletform::infer_fixed_strings(train_docs, InfoUnitLabel::Code))
    j["code"] = {{"subject", code->subject}, {"predicate", code->predicate}};
  if (j.empty()) return;
  std::ofstream os(cfg.paths.model_dir / "calibrated-rules.json");
  os << j.dump(2) << "\n";
}

tripletform::RulesConfig effective_rules(const PipelineConfig& cfg) {
  tripletform::RulesConfig rules = cfg.rules;
  const fs::path file = cfg.paths.model_dir / "calibrated-rules.json";
  std::ifstream is(file);
  if (!is) return rules;
  json j = json::parse(is);
  if (j.contains("research_problem")) {
    rules.research_problem.subject = j["research_problem"].value("subject",
                                                                 rules.research_problem.subject);
    rules.research_problem.predicate =
        j["research_problem"].value("predicate", rules.research_problem.predicate);
  }
  if (j.contains("code")) {
    rules.code.subject = j["code"].value("subject", rules.code.subject);
    rules.code.predicate = j["code"].value("predicate", rules.code.predicate);
  }
  return rules;
}

void append_unique(std::vector<Triplet>& dst, std::vector<Triplet> src) {
  for (Triplet& t : src) {
    if (std::find(dst.begin(), dst.end(), t) == dst.end()) dst.push_back(std::move(t));
  }
}

}  // namespace

void train_sentence_stage(const PipelineConfig& cfg) {
  const std::vector<Document> docs = load_train_docs(cfg);
  sentcls::SentenceModel model(load_encoder(cfg, cfg.encoder.max_token_length),
                               cfg.sentence_classifier, cfg.seed);
  nn::TrainLog log = model.train(docs, cfg.sentence_train);
  model.save(cfg.sentence_model_dir());
  log.save_jsonl(cfg.sentence_model_dir() / "train-log.jsonl");
}

void train_phrase_stage(const PipelineConfig& cfg) {
  const std::vector<Document> docs = load_train_docs(cfg);
  std::optional<encoder::Encoder> enc;
  phrasecrf::PhraseExtractorConfig pcfg = cfg.phrase_extractor;
  pcfg.max_token_length = cfg.encoder.max_token_length;
  if (pcfg.variant != phrasecrf::PhraseExtractorConfig::Variant::RecurrentCrf)
    enc = load_encoder(cfg, cfg.encoder.max_token_length);
  phrasecrf::PhraseModel model(std::move(enc), pcfg, cfg.seed);
  nn::TrainLog log = model.train(docs, cfg.phrase_train);
  model.save(cfg.phrase_model_dir());
  log.save_jsonl(cfg.phrase_model_dir() / "train-log.jsonl");
}

void train_unit_stage(const PipelineConfig& cfg) {
  const std::vector<Document> docs = load_train_docs(cfg);
  fs::create_directories(cfg.paths.model_dir);

  iupredict::IuModel iu(load_encoder(cfg, cfg.iu_classifier.max_tokens), cfg.iu_classifier,
                        cfg.seed);
  iu.train(docs, cfg.iu_train).save_jsonl(cfg.paths.model_dir / "iu-train-log.jsonl");
  iu.save(cfg.iu_model_dir());

  tripletform::PredicateModel predicate(load_encoder(cfg, cfg.predicate_classifier.max_tokens),
                                        cfg.predicate_classifier, cfg.seed);
  predicate.train(docs, cfg.predicate_train)
      .save_jsonl(cfg.paths.model_dir / "predicate-train-log.jsonl");
  predicate.save(cfg.predicate_model_dir());

  tripletform::TripletModel triplet(load_encoder(cfg, cfg.triplet_classifier.max_tokens),
                                    cfg.triplet_classifier, cfg.seed);
  triplet.train(docs, cfg.triplet_train)
      .save_jsonl(cfg.paths.model_dir / "triplet-train-log.jsonl");
  triplet.save(cfg.triplet_model_dir());

  write_calibrated_rules(cfg, docs);
}

corpus::TripletMap form_document_triplets(const Document& doc,
                                          const std::vector<PhraseSpan>& phrases,
                                          const std::vector<int>& sentence_ids,
                                          const StageCModels& models,
                                          const PipelineConfig& cfg) {
  const tripletform::RulesConfig& rules = cfg.rules;
  corpus::TripletMap out;

  // Document-level information units from the concatenated phrases.
  const iupredict::IuPrediction iu_pred =
      models.iu->predict(iupredict::concat_document_phrases(phrases));
  std::map<InfoUnitLabel, double> predicted_scores;
  for (InfoUnitLabel u : iu_pred.predicted) predicted_scores[u] = iu_pred.scores.at(u);
  for (InfoUnitLabel u : iu_pred.predicted) out[u];  // declare every predicted unit

  // Fixed-frame heuristic units.
  std::vector<std::string> rp_objects;
  for (const PhraseSpan& p :
       iupredict::detect_research_problem(doc, phrases, cfg.heuristics))
    rp_objects.push_back(p.text);
  if (!rp_objects.empty())
    out[InfoUnitLabel::ResearchProblem] = tripletform::fixed_unit_triplets(
        tripletform::FixedUnitKind::ResearchProblem, rp_objects, rules);

  std::vector<std::string> urls;
  for (const auto& [index, url] : iupredict::detect_code_urls(doc, cfg.heuristics))
    urls.push_back(url);
  if (!urls.empty())
    out[InfoUnitLabel::Code] =
        tripletform::fixed_unit_triplets(tripletform::FixedUnitKind::Code, urls, rules);

  // Section-heuristic units, formed only when predicted.
  const auto section_triplets = [&](InfoUnitLabel unit, const std::vector<std::string>& keywords) {
    if (!predicted_scores.count(unit)) return;
    const std::set<int> section = tripletform::select_section_sentences(doc, keywords);
    std::vector<Triplet> formed;
    for (int sid : section) {
      const auto ordered = tripletform::sentence_phrases_in_order(phrases, sid);
      for (Triplet& t : tripletform::form_consecutive_triplets(ordered)) {
        t.unit = unit;
        formed.push_back(std::move(t));
      }
    }
    append_unique(out[unit], std::move(formed));
  };
  section_triplets(InfoUnitLabel::Baselines, rules.baselines_keywords);
  section_triplets(InfoUnitLabel::AblationAnalysis, rules.ablation_keywords);

  // Free triplets from the predicate-neighbour rule, with the closed-set
  // fallback for sentences that have phrases but no predicted predicate.
  std::vector<Triplet> free_triplets;
  std::set<int> phrase_sentences;
  for (const PhraseSpan& p : phrases) phrase_sentences.insert(p.sentence_index);
  for (int sid : phrase_sentences) {
    if (!std::count(sentence_ids.begin(), sentence_ids.end(), sid)) continue;
    const auto ordered = tripletform::sentence_phrases_in_order(phrases, sid);
    if (ordered.size() < 2) continue;
    const std::vector<bool> flags = models.predicate->predict(ordered);
    std::vector<Triplet> formed = tripletform::form_predicate_triplets(ordered, flags);
    if (formed.empty()) {
      // Disjoint subject/object pairs with a closed-set predicate.
      for (std::size_t i = 0; i + 1 < ordered.size(); i += 2)
        formed.push_back(tripletform::attach_fallback_predicate(ordered[i], ordered[i + 1],
                                                                doc.sentence(sid),
                                                                rules.closed_predicates));
    }
    for (Triplet& t : formed) free_triplets.push_back(std::move(t));
  }
  if (!free_triplets.empty() && !predicted_scores.empty()) {
    for (Triplet& t :
         tripletform::classify_triplets(*models.triplet, free_triplets, predicted_scores)) {
      auto& list = out[t.unit];
      if (std::find(list.begin(), list.end(), t) == list.end()) list.push_back(std::move(t));
    }
  }
  return out;
}

fs::path run_pipeline(const PipelineConfig& raw_cfg, corpus::Split split) {
  PipelineConfig cfg = raw_cfg;
  cfg.rules = effective_rules(raw_cfg);  // prefer strings calibrated at train time
  const metrics::Phase phase = cfg.phase;
  const std::vector<Document> docs =
      corpus::load_split(cfg.paths.corpus_root, split, cfg.io);

  std::optional<sentcls::SentenceModel> sentence_model;
  if (phase == metrics::Phase::EndToEnd) {
    require_checkpoint(cfg.sentence_model_dir(), "sentence classifier (stage A)", "train-a");
    sentence_model = sentcls::SentenceModel::load(cfg.sentence_model_dir());
  }
  std::optional<phrasecrf::PhraseModel> phrase_model;
  if (phase != metrics::Phase::GoldAB) {
    require_checkpoint(cfg.phrase_model_dir(), "phrase extractor (stage B)", "train-b");
    phrase_model = phrasecrf::PhraseModel::load(cfg.phrase_model_dir());
  }
  require_checkpoint(cfg.iu_model_dir(), "information unit classifier (stage C)", "train-c");
  require_checkpoint(cfg.predicate_model_dir(), "predicate classifier (stage C)", "train-c");
  require_checkpoint(cfg.triplet_model_dir(), "triplet classifier (stage C)", "train-c");
  const iupredict::IuModel iu_model = iupredict::IuModel::load(cfg.iu_model_dir());
  const tripletform::PredicateModel predicate_model =
      tripletform::PredicateModel::load(cfg.predicate_model_dir());
  const tripletform::TripletModel triplet_model =
      tripletform::TripletModel::load(cfg.triplet_model_dir());
  const StageCModels models{&iu_model, &predicate_model, &triplet_model};

  const fs::path out_root =
      cfg.paths.output_dir / (corpus::to_string(split) + "-" + metrics::phase_name(phase));
  fs::create_directories(out_root);

  for (const Document& doc : docs) {
    // Stage A: contribution sentences.
    std::vector<int> sentence_ids;
    if (phase == metrics::Phase::EndToEnd) {
      sentence_ids = sentence_model->predict(doc);
    } else {
      if (!doc.has_gold_sentences())
        throw std::runtime_error("phase " + metrics::phase_name(phase) + " requires gold " +
                                 "contribution sentences for doc '" + doc.doc_id + "'");
      sentence_ids = doc.gold_contribution_indices();
    }

    // Stage B: phrase spans.
    std::vector<PhraseSpan> phrases;
    if (phase == metrics::Phase::GoldAB) {
      if (!doc.gold_phrases)
        throw std::runtime_error("phase gold-ab requires gold phrases for doc '" + doc.doc_id +
                                 "'");
      phrases = *doc.gold_phrases;
    } else {
      phrases = phrase_model->extract(doc, sentence_ids);
    }

    // Stage C: units + triplets.
    const corpus::TripletMap triplets =
        form_document_triplets(doc, phrases, sentence_ids, models, cfg);

    corpus::write_predictions(doc, std::set<int>(sentence_ids.begin(), sentence_ids.end()),
                              phrases, triplets, out_root / doc.doc_id, cfg.io);
  }
  return out_root;
}

metrics::EvalReport evaluate_command(const fs::path& pred_dir, const fs::path& corpus_root,
                                     corpus::Split split, metrics::Phase phase,
                                     const corpus::IoConfig& io) {
  const std::vector<Document> gold = corpus::load_split(corpus_root, split, io);
  std::vector<corpus::DocPredictions> preds;
  for (const Document& d : gold) {
    const fs::path doc_dir = pred_dir / d.doc_id;
    if (fs::is_directory(doc_dir)) preds.push_back(corpus::parse_predictions(doc_dir, io));
  }
  // Prediction directories with no gold counterpart are an alignment error.
  for (const auto& entry : fs::directory_iterator(pred_dir)) {
    if (!entry.is_directory()) continue;
    const std::string id = entry.path().filename().string();
    if (!std::any_of(gold.begin(), gold.end(),
                     [&](const Document& d) { return d.doc_id == id; }))
      throw corpus::ValidationError("prediction directory '" + id +
                                    "' has no matching gold document");
  }
  metrics::EvalReport report = metrics::evaluate_phase(preds, gold, phase);
  {
    std::ofstream os(pred_dir / "report.txt");
    os << metrics::format_report(report);
  }
  {
    std::ofstream os(pred_dir / "report.json");
    os << metrics::report_to_json(report) << "\n";
  }
  return report;
}

}  // namespace ckg::pipeline
