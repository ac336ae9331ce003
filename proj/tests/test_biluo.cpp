#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "ckg/phrasecrf/biluo.hpp"

using ckg::corpus::PhraseSpan;
using ckg::corpus::Sentence;
using ckg::corpus::Token;
using ckg::phrasecrf::AlignMode;
using ckg::phrasecrf::BiluoTag;
using ckg::phrasecrf::biluo_decode;
using ckg::phrasecrf::biluo_encode;
using ckg::phrasecrf::is_valid_biluo;
using ckg::phrasecrf::repair_biluo;
using ckg::phrasecrf::TagSequence;
using ckg::phrasecrf::tags_from_string;
using ckg::phrasecrf::tags_to_string;

namespace {

Sentence make_sentence(const std::vector<std::string>& words, int index = 1) {
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

PhraseSpan span_of_tokens(const Sentence& s, std::size_t first, std::size_t last) {
  PhraseSpan p;
  p.sentence_index = s.index;
  p.start_char = s.tokens[first].start_char;
  p.end_char = s.tokens[last].end_char;
  p.text = s.text.substr(p.start_char, p.end_char - p.start_char);
  return p;
}

// Every length-3 sequence that decodes cleanly.
const std::vector<std::string> kValid3 = {"OOO", "UOO", "OUO", "OOU", "UUO", "UOU", "OUU",
                                          "UUU", "BLO", "OBL", "BIL", "BLU", "UBL"};

// Hand-worked repairs for every invalid length-3 pattern, following the
// documented policy: a dangling I/L becomes B when the next input tag
// continues a phrase and O otherwise; an unterminated B/I is closed from the
// right (B->U, I->L) when a non-continuation or the sequence end follows.
const std::map<std::string, std::string> kRepair3 = {
    {"BBB", "UUU"}, {"BBI", "UBL"}, {"BBL", "UBL"}, {"BBU", "UUU"}, {"BBO", "UUO"},
    {"BIB", "BLU"}, {"BII", "BIL"}, {"BIU", "BLU"}, {"BIO", "BLO"},
    {"BLB", "BLU"}, {"BLI", "BLO"}, {"BLL", "BLO"},
    {"BUB", "UUU"}, {"BUI", "UUO"}, {"BUL", "UUO"}, {"BUU", "UUU"}, {"BUO", "UUO"},
    {"BOB", "UOU"}, {"BOI", "UOO"}, {"BOL", "UOO"}, {"BOU", "UOU"}, {"BOO", "UOO"},
    {"IBB", "OUU"}, {"IBI", "OBL"}, {"IBL", "OBL"}, {"IBU", "OUU"}, {"IBO", "OUO"},
    {"IIB", "BLU"}, {"III", "BIL"}, {"IIL", "BIL"}, {"IIU", "BLU"}, {"IIO", "BLO"},
    {"ILB", "BLU"}, {"ILI", "BLO"}, {"ILL", "BLO"}, {"ILU", "BLU"}, {"ILO", "BLO"},
    {"IUB", "OUU"}, {"IUI", "OUO"}, {"IUL", "OUO"}, {"IUU", "OUU"}, {"IUO", "OUO"},
    {"IOB", "OOU"}, {"IOI", "OOO"}, {"IOL", "OOO"}, {"IOU", "OOU"}, {"IOO", "OOO"},
    {"LBB", "OUU"}, {"LBI", "OBL"}, {"LBL", "OBL"}, {"LBU", "OUU"}, {"LBO", "OUO"},
    {"LIB", "BLU"}, {"LII", "BIL"}, {"LIL", "BIL"}, {"LIU", "BLU"}, {"LIO", "BLO"},
    {"LLB", "BLU"}, {"LLI", "BLO"}, {"LLL", "BLO"}, {"LLU", "BLU"}, {"LLO", "BLO"},
    {"LUB", "OUU"}, {"LUI", "OUO"}, {"LUL", "OUO"}, {"LUU", "OUU"}, {"LUO", "OUO"},
    {"LOB", "OOU"}, {"LOI", "OOO"}, {"LOL", "OOO"}, {"LOU", "OOU"}, {"LOO", "OOO"},
    {"UBB", "UUU"}, {"UBI", "UBL"}, {"UBU", "UUU"}, {"UBO", "UUO"},
    {"UIB", "UOU"}, {"UII", "UBL"}, {"UIL", "UBL"}, {"UIU", "UOU"}, {"UIO", "UOO"},
    {"ULB", "UOU"}, {"ULI", "UBL"}, {"ULL", "UBL"}, {"ULU", "UOU"}, {"ULO", "UOO"},
    {"UUB", "UUU"}, {"UUI", "UUO"}, {"UUL", "UUO"},
    {"UOB", "UOU"}, {"UOI", "UOO"}, {"UOL", "UOO"},
    {"OBB", "OUU"}, {"OBI", "OBL"}, {"OBU", "OUU"}, {"OBO", "OUO"},
    {"OIB", "OOU"}, {"OII", "OBL"}, {"OIL", "OBL"}, {"OIU", "OOU"}, {"OIO", "OOO"},
    {"OLB", "OOU"}, {"OLI", "OBL"}, {"OLL", "OBL"}, {"OLU", "OOU"}, {"OLO", "OOO"},
    {"OUB", "OUU"}, {"OUI", "OUO"}, {"OUL", "OUO"},
    {"OOB", "OOU"}, {"OOI", "OOO"}, {"OOL", "OOO"},
};

// All length-3 tag strings in lexicographic order over BILUO.
std::vector<std::string> all3() {
  const std::string alphabet = "BILUO";
  std::vector<std::string> out;
  for (char a : alphabet)
    for (char b : alphabet)
      for (char c : alphabet) out.push_back({a, b, c});
  return out;
}

// Random non-overlapping token-aligned span set over n tokens.
std::vector<PhraseSpan> random_spans(const Sentence& s, std::mt19937_64& rng) {
  std::vector<PhraseSpan> spans;
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<std::size_t> len_dist(1, 3);
  std::size_t i = 0;
  while (i < s.tokens.size()) {
    if (coin(rng) == 0) {
      const std::size_t len = std::min(len_dist(rng), s.tokens.size() - i);
      spans.push_back(span_of_tokens(s, i, i + len - 1));
      i += len;
    } else {
      ++i;
    }
  }
  return spans;
}

}  // namespace

TEST_CASE("encode: scheme definition examples") {
  const Sentence s = make_sentence({"a", "b", "c", "d"});
  CHECK(tags_to_string(biluo_encode(s, {span_of_tokens(s, 1, 2)})) == "OBLO");
  CHECK(tags_to_string(biluo_encode(s, {span_of_tokens(s, 0, 0)})) == "UOOO");
  CHECK(tags_to_string(biluo_encode(s, {span_of_tokens(s, 0, 2)})) == "BILO");
}

TEST_CASE("encode: overlapping spans are rejected") {
  const Sentence s = make_sentence({"a", "b", "c"});
  CHECK_THROWS_AS(biluo_encode(s, {span_of_tokens(s, 0, 1), span_of_tokens(s, 1, 2)}),
                  ckg::corpus::ValidationError);
}

TEST_CASE("encode: strict mode rejects unaligned spans, snap widens them") {
  const Sentence s = make_sentence({"alpha", "beta", "gamma"});
  PhraseSpan partial;
  partial.sentence_index = 1;
  partial.start_char = s.tokens[1].start_char + 1;  // inside "beta"
  partial.end_char = s.tokens[1].end_char;
  partial.text = s.text.substr(partial.start_char, partial.end_char - partial.start_char);
  CHECK_THROWS_AS(biluo_encode(s, {partial}), ckg::corpus::ValidationError);

  std::size_t snapped = 0;
  const TagSequence tags = biluo_encode(s, {partial}, AlignMode::Snap, &snapped);
  CHECK(snapped == 1);
  CHECK(tags_to_string(tags) == "OUO");
}

TEST_CASE("decode: inverse of encode on the spec examples") {
  const Sentence s = make_sentence({"a", "b", "c", "d"});
  const auto spans = biluo_decode(s, tags_from_string("OBLO"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].text == "b c");
  CHECK(biluo_decode(s, tags_from_string("OOOO")).empty());
}

TEST_CASE("decode repairs the spec's normative invalid pattern") {
  const Sentence s = make_sentence({"a", "b", "c", "d"});
  CHECK(tags_to_string(repair_biluo(tags_from_string("OILO"))) == "OBLO");
  const auto spans = biluo_decode(s, tags_from_string("OILO"));
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].text == "b c");
}

TEST_CASE("repair: hand-worked table covers every invalid length-3 pattern") {
  std::size_t invalid_count = 0;
  for (const std::string& pattern : all3()) {
    const TagSequence tags = tags_from_string(pattern);
    if (is_valid_biluo(tags)) {
      CHECK(repair_biluo(tags) == tags);  // identity on valid input
      CHECK(std::find(kValid3.begin(), kValid3.end(), pattern) != kValid3.end());
      continue;
    }
    ++invalid_count;
    auto it = kRepair3.find(pattern);
    REQUIRE_MESSAGE(it != kRepair3.end(), "missing table entry for ", pattern);
    const std::string got = tags_to_string(repair_biluo(tags));
    CHECK_MESSAGE(got == it->second, pattern, " -> ", got, ", expected ", it->second);
  }
  CHECK(invalid_count == 125 - kValid3.size());
  CHECK(kRepair3.size() == invalid_count);
}

TEST_CASE("repair always yields valid BILUO (random property)") {
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::uniform_int_distribution<int> tag(0, 4);
  for (int rep = 0; rep < 1000; ++rep) {
    TagSequence tags(len(rng));
    for (auto& t : tags) t = static_cast<BiluoTag>(tag(rng));
    const TagSequence repaired = repair_biluo(tags);
    CHECK(is_valid_biluo(repaired));
    if (is_valid_biluo(tags)) CHECK(repaired == tags);
  }
}

TEST_CASE("round trip: decode(encode(spans)) == spans for random span sets") {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<std::size_t> n_tokens(1, 14);
  for (int rep = 0; rep < 1000; ++rep) {
    std::vector<std::string> words;
    const std::size_t n = n_tokens(rng);
    for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
    const Sentence s = make_sentence(words);
    const std::vector<PhraseSpan> spans = random_spans(s, rng);
    const TagSequence tags = biluo_encode(s, spans);
    CHECK(is_valid_biluo(tags));
    const std::vector<PhraseSpan> decoded = biluo_decode(s, tags);
    CHECK(decoded == spans);
    // Decoded spans never overlap.
    for (std::size_t i = 1; i < decoded.size(); ++i)
      CHECK(decoded[i - 1].end_char <= decoded[i].start_char);
  }
}

TEST_CASE("decode maps truncated-word tag positions through token indices") {
  const Sentence s = make_sentence({"a", "b", "c", "d", "e"});
  // Only the first three words survived truncation.
  const std::vector<std::size_t> retained = {0, 1, 2};
  const auto spans = biluo_decode(s, tags_from_string("OBL"), retained);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].text == "b c");
  CHECK_THROWS(biluo_decode(s, tags_from_string("OBLO"), retained));
}
