#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ckg/corpus/io.hpp"
#include "ckg/corpus/stats.hpp"

namespace fs = std::filesystem;
using namespace ckg::corpus;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() / ("ckg_corpus_test_" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p);
  os << content;
}

}  // namespace

TEST_CASE("load_document: minimal two-line file without annotations") {
  const fs::path root = temp_dir();
  write_file(root / "doc1" / "sentences.txt", "hello brave world\nsecond line here\n");
  const Document doc = load_document(root / "doc1");
  CHECK(doc.doc_id == "doc1");
  REQUIRE(doc.sentences.size() == 2);
  CHECK(doc.sentences[0].index == 1);
  CHECK(doc.sentences[1].index == 2);
  CHECK_FALSE(doc.sentences[0].gold_contribution.has_value());
  CHECK_FALSE(doc.gold_phrases.has_value());
  REQUIRE(doc.sentences[0].tokens.size() == 3);
  CHECK(doc.sentences[0].tokens[1].surface == "brave");
  CHECK(doc.sentences[0].tokens[1].start_char == 6);
  CHECK(doc.sentences[0].tokens[1].end_char == 11);
}

TEST_CASE("load_document: sentence count equals line count, blank lines included") {
  const fs::path root = temp_dir();
  write_file(root / "d" / "sentences.txt", "one\n\nthree\n");
  const Document doc = load_document(root / "d");
  CHECK(doc.sentences.size() == 3);
  CHECK(doc.sentences[1].tokens.empty());
}

TEST_CASE("load_document: gold annotations attach and validate") {
  const fs::path root = temp_dir();
  write_file(root / "d" / "sentences.txt", "alpha beta\ngamma delta epsilon\n");
  write_file(root / "d" / "contribution-sentences.txt", "2\n");
  write_file(root / "d" / "phrases.txt", "2\t0\t5\tgamma\n");
  write_file(root / "d" / "triples" / "model.txt", "(gamma||has||delta)\n");

  const Document doc = load_document(root / "d");
  CHECK(doc.sentences[0].gold_contribution == false);
  CHECK(doc.sentences[1].gold_contribution == true);
  REQUIRE(doc.gold_phrases.has_value());
  CHECK(doc.gold_phrases->at(0).text == "gamma");
  REQUIRE(doc.gold_triplets.has_value());
  CHECK(doc.gold_triplets->at(InfoUnitLabel::Model).at(0).predicate == "has");
}

TEST_CASE("load_document: out-of-range and malformed annotations are validation errors") {
  const fs::path root = temp_dir();
  write_file(root / "d" / "sentences.txt", "a b\nc d\ne f\ng h\ni j\n");

  SUBCASE("sentence id 99 in a 5-sentence doc") {
    write_file(root / "d" / "contribution-sentences.txt", "99\n");
    CHECK_THROWS_AS(load_document(root / "d"), ValidationError);
  }
  SUBCASE("phrase span outside its sentence") {
    write_file(root / "d" / "phrases.txt", "1\t0\t99\ta b\n");
    CHECK_THROWS_AS(load_document(root / "d"), ValidationError);
  }
  SUBCASE("phrase text mismatching the sentence substring") {
    write_file(root / "d" / "phrases.txt", "1\t0\t1\tz\n");
    CHECK_THROWS_AS(load_document(root / "d"), ValidationError);
  }
  SUBCASE("overlapping gold spans") {
    write_file(root / "d" / "phrases.txt", "1\t0\t3\ta b\n1\t2\t3\tb\n");
    CHECK_THROWS_AS(load_document(root / "d"), ValidationError);
  }
  SUBCASE("unknown unit file") {
    write_file(root / "d" / "triples" / "nonsense.txt", "(a||b||c)\n");
    CHECK_THROWS_AS(load_document(root / "d"), ValidationError);
  }
}

TEST_CASE("load_document: missing directory or sentences file") {
  const fs::path root = temp_dir();
  CHECK_THROWS_AS(load_document(root / "absent"), LoadError);
  fs::create_directories(root / "empty");
  CHECK_THROWS_AS(load_document(root / "empty"), LoadError);
}

TEST_CASE("load_split: manifest filtering, ordering and errors") {
  const fs::path root = temp_dir();
  write_file(root / "manifest.txt", "zeta\ttrain\nalpha\ttrain\nmid\tdev\n");
  write_file(root / "zeta" / "sentences.txt", "z z\n");
  write_file(root / "alpha" / "sentences.txt", "a a\n");
  write_file(root / "mid" / "sentences.txt", "m m\n");

  const auto train = load_split(root, Split::Train);
  REQUIRE(train.size() == 2);
  CHECK(train[0].doc_id == "alpha");  // lexicographic order
  CHECK(train[1].doc_id == "zeta");
  CHECK(train[0].split == Split::Train);

  CHECK_THROWS_AS(load_split(root, Split::Test), LoadError);
  CHECK_THROWS_AS(load_split(temp_dir(), Split::Train), LoadError);

  SUBCASE("malformed doc is reported with its id") {
    write_file(root / "manifest.txt", "alpha\ttrain\nbroken\ttrain\n");
    fs::create_directories(root / "broken");  // no sentences.txt
    try {
      load_split(root, Split::Train);
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find("broken") != std::string::npos);
    }
  }
}

TEST_CASE("write_predictions: exact formats") {
  const fs::path root = temp_dir();
  write_file(root / "d" / "sentences.txt",
             "alpha beta\nthis is a sentence here\nthird line\n");
  const Document doc = load_document(root / "d");

  PhraseSpan p;
  p.sentence_index = 2;
  p.start_char = 10;
  p.end_char = 18;
  p.text = "sentence";
  TripletMap triplets;
  triplets[InfoUnitLabel::Model] = {Triplet{"a", "has", "b", InfoUnitLabel::Model}};

  const fs::path out = root / "out" / "d";
  write_predictions(doc, {3, 1}, {p}, triplets, out);

  std::ifstream ids(out / "contribution-sentences.txt");
  std::stringstream ids_s;
  ids_s << ids.rdbuf();
  CHECK(ids_s.str() == "1\n3\n");

  std::ifstream ph(out / "phrases.txt");
  std::stringstream ph_s;
  ph_s << ph.rdbuf();
  CHECK(ph_s.str() == "2\t10\t18\tsentence\n");

  std::ifstream tr(out / "triples" / "model.txt");
  std::stringstream tr_s;
  tr_s << tr.rdbuf();
  CHECK(tr_s.str() == "(a||has||b)\n");
}

TEST_CASE("write_predictions validates against the document") {
  const fs::path root = temp_dir();
  write_file(root / "d" / "sentences.txt", "a b\n");
  const Document doc = load_document(root / "d");
  CHECK_THROWS_AS(write_predictions(doc, {5}, {}, {}, root / "out"), ValidationError);
}

TEST_CASE("round trip: write_predictions then parse_predictions is identity") {
  std::mt19937_64 rng(99);
  for (int rep = 0; rep < 25; ++rep) {
    const fs::path root = temp_dir();
    // Random doc of 3-6 sentences, 2-6 tokens each.
    std::uniform_int_distribution<int> n_sents(3, 6), n_toks(2, 6), coin(0, 1);
    std::string content;
    const int ns = n_sents(rng);
    for (int i = 0; i < ns; ++i) {
      const int nt = n_toks(rng);
      for (int t = 0; t < nt; ++t) content += "tok" + std::to_string(t) + (t + 1 < nt ? " " : "");
      content += "\n";
    }
    write_file(root / "doc" / "sentences.txt", content);
    const Document doc = load_document(root / "doc");

    std::set<int> sentences;
    std::vector<PhraseSpan> phrases;
    for (const Sentence& s : doc.sentences) {
      if (coin(rng)) sentences.insert(s.index);
      if (coin(rng) && !s.tokens.empty()) {
        PhraseSpan p;
        p.sentence_index = s.index;
        p.start_char = s.tokens[0].start_char;
        p.end_char = s.tokens[s.tokens.size() / 2].end_char;
        p.text = s.text.substr(p.start_char, p.end_char - p.start_char);
        phrases.push_back(p);
      }
    }
    TripletMap triplets;
    if (coin(rng))
      triplets[InfoUnitLabel::Results] = {
          Triplet{"subject phrase", "has value", "94.5 %", InfoUnitLabel::Results}};
    if (coin(rng)) triplets[InfoUnitLabel::Tasks] = {};  // predicted unit, no triplets

    const fs::path out = root / "pred" / "doc";
    write_predictions(doc, sentences, phrases, triplets, out);
    const DocPredictions parsed = parse_predictions(out);

    CHECK(parsed.sentences == sentences);
    std::vector<PhraseSpan> sorted = phrases;
    std::sort(sorted.begin(), sorted.end());
    CHECK(parsed.phrases == sorted);
    CHECK(parsed.triplets == triplets);
  }
}

TEST_CASE("corpus statistics over a synthetic gold split") {
  const fs::path root = temp_dir();
  // Doc A: 3 sentences (1 contribution), 2+101+1 = 104 tokens.
  std::string long_sentence;
  for (int i = 0; i < 101; ++i) long_sentence += "w ";
  write_file(root / "a" / "sentences.txt", "t1 t2\n" + long_sentence + "\nx\n");
  write_file(root / "a" / "contribution-sentences.txt", "1\n");
  write_file(root / "a" / "phrases.txt", "1\t0\t2\tt1\n");
  write_file(root / "a" / "triples" / "model.txt", "(a||b||c)\n");
  write_file(root / "a" / "triples" / "results.txt", "(d||e||f)\n");
  // Doc B: 1 sentence, all contribution.
  write_file(root / "b" / "sentences.txt", "u1 u2 u3\n");
  write_file(root / "b" / "contribution-sentences.txt", "1\n");
  write_file(root / "b" / "phrases.txt", "1\t0\t2\tu1\n1\t3\t5\tu2\n1\t6\t8\tu3\n");
  write_file(root / "b" / "triples" / "code.txt", "(g||h||i)\n");
  write_file(root / "manifest.txt", "a\ttrain\nb\ttrain\n");

  const auto docs = load_split(root, Split::Train);
  const SplitStatistics st = corpus_statistics(docs);
  CHECK(st.documents == 2);
  CHECK(st.contribution_sentences == 2);
  CHECK(st.non_contribution_sentences == 2);
  CHECK(st.avg_sentences_per_doc == doctest::Approx(2.0));
  CHECK(st.avg_tokens_per_sentence == doctest::Approx((2 + 101 + 1 + 3) / 4.0));
  CHECK(st.avg_contribution_sentences_per_doc == doctest::Approx(1.0));
  CHECK(st.avg_phrases_per_doc == doctest::Approx(2.0));
  CHECK(st.avg_info_units_per_doc == doctest::Approx(1.5));
  CHECK(st.max_tokens_in_sentence == 101);
  // 3 of 4 sentences have <= 50 and <= 100 tokens; all are <= 150.
  CHECK(st.fraction_within_length[0] == doctest::Approx(0.75));
  CHECK(st.fraction_within_length[1] == doctest::Approx(0.75));
  CHECK(st.fraction_within_length[2] == doctest::Approx(1.0));
  CHECK(st.fraction_within_length[3] == doctest::Approx(1.0));
}

TEST_CASE("corpus statistics require gold annotations") {
  const fs::path root = temp_dir();
  write_file(root / "a" / "sentences.txt", "x\n");
  Document doc = load_document(root / "a");
  CHECK_THROWS_AS(corpus_statistics({doc}), ValidationError);
}

TEST_CASE("gold phrase invariant holds corpus-wide after load") {
  const fs::path root = temp_dir();
  write_file(root / "d" / "sentences.txt", "alpha beta gamma\n");
  write_file(root / "d" / "phrases.txt", "1\t6\t10\tbeta\n");
  const Document doc = load_document(root / "d");
  for (const auto& p : *doc.gold_phrases) {
    const Sentence& s = doc.sentence(p.sentence_index);
    CHECK(s.text.substr(p.start_char, p.end_char - p.start_char) == p.text);
  }
}
