#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "ckg/iupredict/classifier.hpp"
#include "ckg/iupredict/heuristics.hpp"

namespace fs = std::filesystem;
using namespace ckg;
using corpus::Document;
using corpus::InfoUnitLabel;
using corpus::PhraseSpan;
using corpus::Sentence;
using corpus::Token;

namespace {

Sentence make_sentence(const std::vector<std::string>& words, int index) {
  Sentence s;
  s.index = index;
  std::size_t pos = 0;
  for (const auto& w : words) {
    if (!s.text.empty()) {
      s.text += " ";
      ++pos;
    }
    s.tokens.push_back(Token{w, pos, pos + w.size()});
    s.text += w;
    pos += w.size();
  }
  return s;
}

PhraseSpan phrase_at(int sentence, std::size_t start, const std::string& text) {
  PhraseSpan p;
  p.sentence_index = sentence;
  p.start_char = start;
  p.end_char = start + text.size();
  p.text = text;
  return p;
}

encoder::Encoder tiny_encoder(std::size_t max_tokens = 64) {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "ckg_iu_test_ckpt";
    fs::remove_all(d);
    encoder::Encoder::write_tiny_checkpoint(d, 41, 16, 1, 2, 32, 128);
    return d;
  }();
  encoder::EncoderConfig cfg;
  cfg.checkpoint_id = dir.string();
  cfg.fine_tune = false;
  cfg.max_token_length = max_tokens;
  return encoder::Encoder::load(cfg);
}

iupredict::IuClassifierConfig tiny_config() {
  iupredict::IuClassifierConfig cfg;
  cfg.recurrent_layers = 1;
  cfg.recurrent_hidden = 8;
  cfg.linear_sizes = {16};
  cfg.dropout = 0.0;
  cfg.max_tokens = 64;
  return cfg;
}

}  // namespace

TEST_CASE("classifier unit list excludes the two heuristic units") {
  const auto& units = iupredict::classifier_units();
  CHECK(units.size() == 10);
  for (InfoUnitLabel u : units) {
    CHECK(u != InfoUnitLabel::ResearchProblem);
    CHECK(u != InfoUnitLabel::Code);
  }
}

TEST_CASE("concat_document_phrases: occurrence order, duplicates kept, empty ok") {
  const auto p1 = phrase_at(2, 0, "p1");
  const auto p2 = phrase_at(5, 3, "p2");
  CHECK(iupredict::concat_document_phrases({p2, p1}) == "p1 p2");

  const auto dup = phrase_at(2, 9, "p1");
  CHECK(iupredict::concat_document_phrases({p1, dup}) == "p1 p1");

  CHECK(iupredict::concat_document_phrases({}) == "");

  // Within one sentence, start offset orders the phrases.
  const auto early = phrase_at(3, 1, "early");
  const auto late = phrase_at(3, 20, "late");
  CHECK(iupredict::concat_document_phrases({late, early}) == "early late");
}

TEST_CASE("threshold rule and top-2 fallback") {
  std::map<InfoUnitLabel, double> scores;
  for (InfoUnitLabel u : iupredict::classifier_units()) scores[u] = 0.1;
  scores[InfoUnitLabel::Model] = 0.9;
  scores[InfoUnitLabel::Results] = 0.7;

  auto predicted = iupredict::IuModel::apply_threshold(scores, 0.5);
  CHECK(predicted == std::vector<InfoUnitLabel>{InfoUnitLabel::Results, InfoUnitLabel::Model});

  // All below threshold: the two best-scoring units are returned.
  for (auto& [u, s] : scores) s = 0.1;
  scores[InfoUnitLabel::Dataset] = 0.4;
  scores[InfoUnitLabel::Tasks] = 0.3;
  predicted = iupredict::IuModel::apply_threshold(scores, 0.5);
  REQUIRE(predicted.size() == 2);
  CHECK(std::count(predicted.begin(), predicted.end(), InfoUnitLabel::Dataset) == 1);
  CHECK(std::count(predicted.begin(), predicted.end(), InfoUnitLabel::Tasks) == 1);
}

TEST_CASE("raising the threshold never adds units (monotonicity)") {
  std::map<InfoUnitLabel, double> scores;
  double v = 0.05;
  for (InfoUnitLabel u : iupredict::classifier_units()) {
    scores[u] = v;
    v += 0.1;
  }
  for (double lo = 0.1; lo < 0.9; lo += 0.1) {
    const auto a = iupredict::IuModel::apply_threshold(scores, lo);
    const auto b = iupredict::IuModel::apply_threshold(scores, lo + 0.1);
    if (b.size() > 2 || a.size() > 2) {  // outside the fallback regime
      for (InfoUnitLabel u : b)
        CHECK(std::find(a.begin(), a.end(), u) != a.end());
    }
  }
}

TEST_CASE("iu classifier trains on gold concatenations with decreasing loss") {
  // Two documents with complementary unit sets and distinct vocabulary.
  std::vector<Document> docs(4);
  for (int d = 0; d < 4; ++d) {
    Document& doc = docs[d];
    doc.doc_id = "d" + std::to_string(d);
    const bool kind = d % 2 == 0;
    doc.sentences.push_back(make_sentence(
        kind ? std::vector<std::string>{"model", "layers", "attention"}
             : std::vector<std::string>{"results", "accuracy", "gains"},
        1));
    std::vector<PhraseSpan> phrases;
    const Sentence& s = doc.sentences[0];
    for (const auto& tok : s.tokens) {
      PhraseSpan p;
      p.sentence_index = 1;
      p.start_char = tok.start_char;
      p.end_char = tok.end_char;
      p.text = tok.surface;
      phrases.push_back(p);
    }
    doc.gold_phrases = phrases;
    corpus::TripletMap triplets;
    triplets[kind ? InfoUnitLabel::Model : InfoUnitLabel::Results] = {};
    doc.gold_triplets = triplets;
  }

  iupredict::IuModel model(tiny_encoder(), tiny_config(), 43);
  iupredict::IuTrainConfig tcfg;
  tcfg.batch_size = 2;
  tcfg.learning_rate = 1e-2;
  tcfg.epochs = 6;
  const nn::TrainLog log = model.train(docs, tcfg);
  CHECK(log.epochs.back().loss < log.epochs.front().loss);

  const auto pred = model.predict("model layers attention");
  CHECK(pred.scores.size() == 10);
  CHECK(!pred.predicted.empty());
  CHECK(pred.scores.at(InfoUnitLabel::Model) > pred.scores.at(InfoUnitLabel::Results));

  // Degenerate empty input must not crash.
  const auto empty_pred = model.predict("");
  CHECK(empty_pred.scores.size() == 10);
  CHECK(!empty_pred.predicted.empty());
}

TEST_CASE("research problem heuristic: single-phrase sentences in the first 30 lines") {
  Document doc;
  doc.doc_id = "d";
  for (int i = 1; i <= 35; ++i) doc.sentences.push_back(make_sentence({"w1", "w2", "w3"}, i));

  std::vector<PhraseSpan> phrases;
  phrases.push_back(phrase_at(4, 0, "w1"));           // sentence 4: exactly one phrase
  phrases.push_back(phrase_at(7, 0, "w1"));           // sentence 7: two phrases
  phrases.push_back(phrase_at(7, 3, "w2"));
  phrases.push_back(phrase_at(31, 0, "w1"));          // beyond line 30
  phrases.push_back(phrase_at(30, 3, "w2"));          // boundary line 30: one phrase

  const auto objects = iupredict::detect_research_problem(doc, phrases);
  REQUIRE(objects.size() == 2);
  CHECK(objects[0].sentence_index == 4);
  CHECK(objects[1].sentence_index == 30);
}

TEST_CASE("research problem heuristic ignores phrases beyond sentence 30") {
  Document doc;
  doc.doc_id = "d";
  for (int i = 1; i <= 40; ++i) doc.sentences.push_back(make_sentence({"w1", "w2"}, i));
  std::vector<PhraseSpan> base = {phrase_at(3, 0, "w1")};
  std::vector<PhraseSpan> extended = base;
  extended.push_back(phrase_at(39, 0, "w1"));
  extended.push_back(phrase_at(40, 0, "w1"));
  CHECK(iupredict::detect_research_problem(doc, base) ==
        iupredict::detect_research_problem(doc, extended));
}

TEST_CASE("code URL heuristic: cue token plus URL extraction") {
  Document doc;
  doc.doc_id = "d";
  doc.sentences.push_back(
      make_sentence({"Our", "code", "is", "at", "https://github.com/x/y", "."}, 1));
  doc.sentences.push_back(make_sentence({"Dataset", "from", "http://data.org"}, 2));
  doc.sentences.push_back(make_sentence({"We", "release", "code", "at", "ftp://host/path"}, 3));
  doc.sentences.push_back(make_sentence({"See", "github.com/a/b", "for", "our", "stuff"}, 4));
  doc.sentences.push_back(make_sentence({"encode", "this", "http://x.y"}, 5));  // no whole word

  const auto urls = iupredict::detect_code_urls(doc);
  REQUIRE(urls.size() == 3);
  CHECK(urls[0] == std::pair<int, std::string>{1, "https://github.com/x/y"});
  CHECK(urls[1] == std::pair<int, std::string>{3, "ftp://host/path"});
  CHECK(urls[2] == std::pair<int, std::string>{4, "github.com/a/b"});
}

TEST_CASE("code URL heuristic trims trailing punctuation inside tokens") {
  Document doc;
  doc.doc_id = "d";
  doc.sentences.push_back(make_sentence({"our", "page", "(https://site.io/repo)."}, 1));
  const auto urls = iupredict::detect_code_urls(doc);
  REQUIRE(urls.size() == 0);  // "(https..." is not scheme-prefixed

  Document doc2;
  doc2.doc_id = "d2";
  doc2.sentences.push_back(make_sentence({"our", "page", "https://site.io/repo."}, 1));
  const auto urls2 = iupredict::detect_code_urls(doc2);
  REQUIRE(urls2.size() == 1);
  CHECK(urls2[0].second == "https://site.io/repo");
}
