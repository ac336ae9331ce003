#include "ckg/pipeline/config.hpp"

#include <fstream>

namespace ckg::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_unit_names(const json& j, corpus::UnitNameMap& names) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto& [unit, name] : names) {
      if (corpus::unit_name(unit) == key) {
        name = value.get<std::string>();
        known = true;
        break;
      }
    }
    if (!known) throw std::invalid_argument("config: unknown info unit '" + key + "'");
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_file(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open config file " + file.string());
  return from_json(json::parse(is));
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  maybe(j, "seed", c.seed);
  if (j.contains("phase")) c.phase = metrics::phase_from_name(j.at("phase").get<std::string>());

  if (j.contains("paths")) {
    const json& p = j.at("paths");
    if (p.contains("corpus_root")) c.paths.corpus_root = p.at("corpus_root").get<std::string>();
    if (p.contains("model_dir")) c.paths.model_dir = p.at("model_dir").get<std::string>();
    if (p.contains("output_dir")) c.paths.output_dir = p.at("output_dir").get<std::string>();
  }

  if (j.contains("encoder")) {
    const json& e = j.at("encoder");
    maybe(e, "checkpoint_id", c.encoder.checkpoint_id);
    maybe(e, "max_token_length", c.encoder.max_token_length);
    maybe(e, "fine_tune", c.encoder.fine_tune);
  }

  if (j.contains("sentence_classifier")) {
    const json& s = j.at("sentence_classifier");
    maybe(s, "recurrent_layers", c.sentence_classifier.recurrent_layers);
    maybe(s, "recurrent_hidden", c.sentence_classifier.recurrent_hidden);
    maybe(s, "linear_sizes", c.sentence_classifier.linear_sizes);
    maybe(s, "dropout", c.sentence_classifier.dropout);
    if (s.contains("head"))
      c.sentence_classifier.head = s.at("head").get<std::string>() == "convolutional"
                                       ? sentcls::SentClassifierConfig::Head::Convolutional
                                       : sentcls::SentClassifierConfig::Head::Recurrent;
    maybe(s, "conv_kernel_sizes", c.sentence_classifier.conv_kernel_sizes);
    maybe(s, "conv_filters", c.sentence_classifier.conv_filters);
    if (s.contains("train")) {
      const json& t = s.at("train");
      maybe(t, "batch_size", c.sentence_train.batch_size);
      maybe(t, "learning_rate", c.sentence_train.learning_rate);
      maybe(t, "epochs", c.sentence_train.epochs);
      maybe(t, "class_weighting", c.sentence_train.class_weighting);
      maybe(t, "oversample_minority", c.sentence_train.oversample_minority);
      maybe(t, "weight_decay", c.sentence_train.weight_decay);
    }
  }

  if (j.contains("phrase_extractor")) {
    const json& s = j.at("phrase_extractor");
    if (s.contains("variant"))
      c.phrase_extractor.variant = phrasecrf::variant_from_name(s.at("variant").get<std::string>());
    maybe(s, "recurrent_layers", c.phrase_extractor.recurrent_layers);
    maybe(s, "recurrent_hidden", c.phrase_extractor.recurrent_hidden);
    maybe(s, "dropout", c.phrase_extractor.dropout);
    maybe(s, "word_embedding_dim", c.phrase_extractor.word_embedding_dim);
    maybe(s, "l2_weight", c.phrase_extractor.l2_weight);
    maybe(s, "constrained_decode", c.phrase_extractor.constrained_decode);
    if (s.contains("train")) {
      const json& t = s.at("train");
      maybe(t, "batch_size", c.phrase_train.batch_size);
      maybe(t, "learning_rate", c.phrase_train.learning_rate);
      maybe(t, "epochs", c.phrase_train.epochs);
      maybe(t, "weight_decay", c.phrase_train.weight_decay);
    }
  }

  if (j.contains("iu_classifier")) {
    const json& s = j.at("iu_classifier");
    maybe(s, "sigmoid_threshold", c.iu_classifier.sigmoid_threshold);
    maybe(s, "max_tokens", c.iu_classifier.max_tokens);
    maybe(s, "recurrent_layers", c.iu_classifier.recurrent_layers);
    maybe(s, "recurrent_hidden", c.iu_classifier.recurrent_hidden);
    maybe(s, "linear_sizes", c.iu_classifier.linear_sizes);
    maybe(s, "dropout", c.iu_classifier.dropout);
    if (s.contains("train")) {
      const json& t = s.at("train");
      maybe(t, "batch_size", c.iu_train.batch_size);
      maybe(t, "learning_rate", c.iu_train.learning_rate);
      maybe(t, "epochs", c.iu_train.epochs);
      maybe(t, "weight_decay", c.iu_train.weight_decay);
    }
  }

  if (j.contains("predicate_classifier")) {
    const json& s = j.at("predicate_classifier");
    maybe(s, "max_tokens", c.predicate_classifier.max_tokens);
    maybe(s, "recurrent_layers", c.predicate_classifier.recurrent_layers);
    maybe(s, "recurrent_hidden", c.predicate_classifier.recurrent_hidden);
    maybe(s, "linear_sizes", c.predicate_classifier.linear_sizes);
    maybe(s, "dropout", c.predicate_classifier.dropout);
    if (s.contains("train")) {
      const json& t = s.at("train");
      maybe(t, "batch_size", c.predicate_train.batch_size);
      maybe(t, "learning_rate", c.predicate_train.learning_rate);
      maybe(t, "epochs", c.predicate_train.epochs);
      maybe(t, "weight_decay", c.predicate_train.weight_decay);
    }
  }

  if (j.contains("triplet_classifier")) {
    const json& s = j.at("triplet_classifier");
    maybe(s, "max_tokens", c.triplet_classifier.max_tokens);
    maybe(s, "recurrent_layers", c.triplet_classifier.recurrent_layers);
    maybe(s, "recurrent_hidden", c.triplet_classifier.recurrent_hidden);
    maybe(s, "linear_sizes", c.triplet_classifier.linear_sizes);
    maybe(s, "dropout", c.triplet_classifier.dropout);
    if (s.contains("train")) {
      const json& t = s.at("train");
      maybe(t, "batch_size", c.triplet_train.batch_size);
      maybe(t, "learning_rate", c.triplet_train.learning_rate);
      maybe(t, "epochs", c.triplet_train.epochs);
      maybe(t, "weight_decay", c.triplet_train.weight_decay);
    }
  }

  if (j.contains("heuristics")) {
    const json& s = j.at("heuristics");
    maybe(s, "research_problem_max_line", c.heuristics.research_problem_max_line);
    maybe(s, "url_schemes", c.heuristics.url_schemes);
    maybe(s, "allow_bare_github", c.heuristics.allow_bare_github);
    maybe(s, "url_required_tokens", c.heuristics.url_required_tokens);
  }

  if (j.contains("triplet_rules")) {
    const json& s = j.at("triplet_rules");
    maybe(s, "closed_predicates", c.rules.closed_predicates);
    maybe(s, "baselines_keywords", c.rules.baselines_keywords);
    maybe(s, "ablation_keywords", c.rules.ablation_keywords);
    if (s.contains("research_problem")) {
      maybe(s.at("research_problem"), "subject", c.rules.research_problem.subject);
      maybe(s.at("research_problem"), "predicate", c.rules.research_problem.predicate);
    }
    if (s.contains("code")) {
      maybe(s.at("code"), "subject", c.rules.code.subject);
      maybe(s.at("code"), "predicate", c.rules.code.predicate);
    }
  }

  maybe(j, "triplet_separator", c.io.triplet_separator);
  if (j.contains("unit_names")) parse_unit_names(j.at("unit_names"), c.io.unit_names);

  // Training seeds derive from the pipeline seed.
  c.sentence_train.seed = c.seed;
  c.phrase_train.seed = c.seed + 1;
  c.iu_train.seed = c.seed + 2;
  c.predicate_train.seed = c.seed + 3;
  c.triplet_train.seed = c.seed + 4;
  return c;
}

json PipelineConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["phase"] = metrics::phase_name(phase);
  j["paths"] = {{"corpus_root", paths.corpus_root.string()},
                {"model_dir", paths.model_dir.string()},
                {"output_dir", paths.output_dir.string()}};
  j["encoder"] = {{"checkpoint_id", encoder.checkpoint_id},
                  {"max_token_length", encoder.max_token_length},
                  {"fine_tune", encoder.fine_tune}};
  j["sentence_classifier"] = {
      {"recurrent_layers", sentence_classifier.recurrent_layers},
      {"recurrent_hidden", sentence_classifier.recurrent_hidden},
      {"linear_sizes", sentence_classifier.linear_sizes},
      {"dropout", sentence_classifier.dropout},
      {"head", sentence_classifier.head == sentcls::SentClassifierConfig::Head::Recurrent
                   ? "recurrent"
                   : "convolutional"},
      {"conv_kernel_sizes", sentence_classifier.conv_kernel_sizes},
      {"conv_filters", sentence_classifier.conv_filters},
      {"train",
       {{"batch_size", sentence_train.batch_size},
        {"learning_rate", sentence_train.learning_rate},
        {"epochs", sentence_train.epochs},
        {"class_weighting", sentence_train.class_weighting},
        {"oversample_minority", sentence_train.oversample_minority},
        {"weight_decay", sentence_train.weight_decay}}}};
  j["phrase_extractor"] = {{"variant", phrasecrf::variant_name(phrase_extractor.variant)},
                           {"recurrent_layers", phrase_extractor.recurrent_layers},
                           {"recurrent_hidden", phrase_extractor.recurrent_hidden},
                           {"dropout", phrase_extractor.dropout},
                           {"word_embedding_dim", phrase_extractor.word_embedding_dim},
                           {"l2_weight", phrase_extractor.l2_weight},
                           {"constrained_decode", phrase_extractor.constrained_decode},
                           {"train",
                            {{"batch_size", phrase_train.batch_size},
                             {"learning_rate", phrase_train.learning_rate},
                             {"epochs", phrase_train.epochs},
                             {"weight_decay", phrase_train.weight_decay}}}};
  j["iu_classifier"] = {{"sigmoid_threshold", iu_classifier.sigmoid_threshold},
                        {"max_tokens", iu_classifier.max_tokens},
                        {"recurrent_layers", iu_classifier.recurrent_layers},
                        {"recurrent_hidden", iu_classifier.recurrent_hidden},
                        {"linear_sizes", iu_classifier.linear_sizes},
                        {"dropout", iu_classifier.dropout},
                        {"train",
                         {{"batch_size", iu_train.batch_size},
                          {"learning_rate", iu_train.learning_rate},
                          {"epochs", iu_train.epochs},
                          {"weight_decay", iu_train.weight_decay}}}};
  j["predicate_classifier"] = {{"max_tokens", predicate_classifier.max_tokens},
                               {"recurrent_layers", predicate_classifier.recurrent_layers},
                               {"recurrent_hidden", predicate_classifier.recurrent_hidden},
                               {"linear_sizes", predicate_classifier.linear_sizes},
                               {"dropout", predicate_classifier.dropout},
                               {"train",
                                {{"batch_size", predicate_train.batch_size},
                                 {"learning_rate", predicate_train.learning_rate},
                                 {"epochs", predicate_train.epochs},
                                 {"weight_decay", predicate_train.weight_decay}}}};
  j["triplet_classifier"] = {{"max_tokens", triplet_classifier.max_tokens},
                             {"recurrent_layers", triplet_classifier.recurrent_layers},
                             {"recurrent_hidden", triplet_classifier.recurrent_hidden},
                             {"linear_sizes", triplet_classifier.linear_sizes},
                             {"dropout", triplet_classifier.dropout},
                             {"train",
                              {{"batch_size", triplet_train.batch_size},
                               {"learning_rate", triplet_train.learning_rate},
                               {"epochs", triplet_train.epochs},
                               {"weight_decay", triplet_train.weight_decay}}}};
  j["heuristics"] = {{"research_problem_max_line", heuristics.research_problem_max_line},
                     {"url_schemes", heuristics.url_schemes},
                     {"allow_bare_github", heuristics.allow_bare_github},
                     {"url_required_tokens", heuristics.url_required_tokens}};
  j["triplet_rules"] = {{"closed_predicates", rules.closed_predicates},
                        {"baselines_keywords", rules.baselines_keywords},
                        {"ablation_keywords", rules.ablation_keywords},
                        {"research_problem",
                         {{"subject", rules.research_problem.subject},
                          {"predicate", rules.research_problem.predicate}}},
                        {"code",
                         {{"subject", rules.code.subject},
                          {"predicate", rules.code.predicate}}}};
  j["triplet_separator"] = io.triplet_separator;
  json names = json::object();
  for (const auto& [unit, name] : io.unit_names) names[corpus::unit_name(unit)] = name;
  j["unit_names"] = names;
  return j;
}

}  // namespace ckg::pipeline
