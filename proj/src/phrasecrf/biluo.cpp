#include "ckg/phrasecrf/biluo.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "ckg/crf/linear_chain.hpp"

namespace ckg::phrasecrf {

using corpus::PhraseSpan;
using corpus::Sentence;
using corpus::ValidationError;

char tag_char(BiluoTag t) {
  switch (t) {
    case BiluoTag::Begin: return 'B';
    case BiluoTag::Inside: return 'I';
    case BiluoTag::Last: return 'L';
    case BiluoTag::Unit: return 'U';
    case BiluoTag::Outside: return 'O';
  }
  return '?';
}

std::string tags_to_string(const std::vector<BiluoTag>& tags) {
  std::string s;
  s.reserve(tags.size());
  for (BiluoTag t : tags) s.push_back(tag_char(t));
  return s;
}

std::vector<BiluoTag> tags_from_string(const std::string& s) {
  std::vector<BiluoTag> tags;
  tags.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case 'B': tags.push_back(BiluoTag::Begin); break;
      case 'I': tags.push_back(BiluoTag::Inside); break;
      case 'L': tags.push_back(BiluoTag::Last); break;
      case 'U': tags.push_back(BiluoTag::Unit); break;
      case 'O': tags.push_back(BiluoTag::Outside); break;
      default: throw std::invalid_argument(std::string("unknown BILUO tag char: ") + c);
    }
  }
  return tags;
}

TagSequence biluo_encode(const Sentence& sentence, const std::vector<PhraseSpan>& spans,
                         AlignMode mode, std::size_t* snapped_count) {
  const auto& tokens = sentence.tokens;
  TagSequence tags(tokens.size(), BiluoTag::Outside);

  for (const PhraseSpan& span : spans) {
    if (span.sentence_index != sentence.index)
      throw ValidationError("biluo_encode: span belongs to sentence " +
                            std::to_string(span.sentence_index) + ", not " +
                            std::to_string(sentence.index));
    // Tokens overlapping [start, end).
    std::size_t first = tokens.size(), last = tokens.size();
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (tokens[i].end_char > span.start_char && tokens[i].start_char < span.end_char) {
        if (first == tokens.size()) first = i;
        last = i;
      }
    }
    if (first == tokens.size())
      throw ValidationError("biluo_encode: span [" + std::to_string(span.start_char) + "," +
                            std::to_string(span.end_char) + ") covers no token in sentence " +
                            std::to_string(sentence.index));
    const bool aligned =
        tokens[first].start_char == span.start_char && tokens[last].end_char == span.end_char;
    if (!aligned) {
      if (mode == AlignMode::Strict)
        throw ValidationError("biluo_encode: span [" + std::to_string(span.start_char) + "," +
                              std::to_string(span.end_char) +
                              ") is not token-aligned in sentence " +
                              std::to_string(sentence.index));
      if (snapped_count) ++*snapped_count;
    }
    for (std::size_t i = first; i <= last; ++i)
      if (tags[i] != BiluoTag::Outside)
        throw ValidationError("biluo_encode: overlapping spans at token " + std::to_string(i) +
                              " of sentence " + std::to_string(sentence.index));
    if (first == last) {
      tags[first] = BiluoTag::Unit;
    } else {
      tags[first] = BiluoTag::Begin;
      for (std::size_t i = first + 1; i < last; ++i) tags[i] = BiluoTag::Inside;
      tags[last] = BiluoTag::Last;
    }
  }
  return tags;
}

bool is_valid_biluo(const TagSequence& tags) {
  bool open = false;
  for (BiluoTag t : tags) {
    switch (t) {
      case BiluoTag::Begin:
        if (open) return false;
        open = true;
        break;
      case BiluoTag::Inside:
      case BiluoTag::Last:
        if (!open) return false;
        if (t == BiluoTag::Last) open = false;
        break;
      case BiluoTag::Unit:
      case BiluoTag::Outside:
        if (open) return false;
        break;
    }
  }
  return !open;
}

TagSequence repair_biluo(const TagSequence& tags) {
  TagSequence out = tags;
  const std::size_t n = out.size();
  for (std::size_t t = 0; t < n; ++t) {
    const bool open = t > 0 && (out[t - 1] == BiluoTag::Begin || out[t - 1] == BiluoTag::Inside);
    switch (out[t]) {
      case BiluoTag::Begin:
      case BiluoTag::Unit:
      case BiluoTag::Outside:
        if (open) out[t - 1] = out[t - 1] == BiluoTag::Begin ? BiluoTag::Unit : BiluoTag::Last;
        break;
      case BiluoTag::Inside:
      case BiluoTag::Last:
        if (!open) {
          const bool continuation =
              t + 1 < n && (tags[t + 1] == BiluoTag::Inside || tags[t + 1] == BiluoTag::Last);
          out[t] = continuation ? BiluoTag::Begin : BiluoTag::Outside;
        }
        break;
    }
  }
  if (n > 0) {
    if (out[n - 1] == BiluoTag::Begin) out[n - 1] = BiluoTag::Unit;
    else if (out[n - 1] == BiluoTag::Inside) out[n - 1] = BiluoTag::Last;
  }
  return out;
}

std::vector<PhraseSpan> biluo_decode(const Sentence& sentence, const TagSequence& tags) {
  std::vector<std::size_t> identity(tags.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  return biluo_decode(sentence, tags, identity);
}

std::vector<PhraseSpan> biluo_decode(const Sentence& sentence, const TagSequence& tags,
                                     const std::vector<std::size_t>& token_indices) {
  if (tags.size() != token_indices.size())
    throw ValidationError("biluo_decode: tag count " + std::to_string(tags.size()) +
                          " does not match token index count " +
                          std::to_string(token_indices.size()));
  for (std::size_t idx : token_indices)
    if (idx >= sentence.tokens.size())
      throw ValidationError("biluo_decode: token index out of range in sentence " +
                            std::to_string(sentence.index));

  const TagSequence seq = is_valid_biluo(tags) ? tags : repair_biluo(tags);
  std::vector<PhraseSpan> spans;
  std::size_t open_start = 0;
  bool open = false;
  auto emit = [&](std::size_t first_pos, std::size_t last_pos) {
    const auto& first_tok = sentence.tokens[token_indices[first_pos]];
    const auto& last_tok = sentence.tokens[token_indices[last_pos]];
    PhraseSpan p;
    p.sentence_index = sentence.index;
    p.start_char = first_tok.start_char;
    p.end_char = last_tok.end_char;
    p.text = sentence.text.substr(p.start_char, p.end_char - p.start_char);
    spans.push_back(std::move(p));
  };
  for (std::size_t i = 0; i < seq.size(); ++i) {
    switch (seq[i]) {
      case BiluoTag::Unit: emit(i, i); break;
      case BiluoTag::Begin:
        open = true;
        open_start = i;
        break;
      case BiluoTag::Last:
        emit(open_start, i);
        open = false;
        break;
      case BiluoTag::Inside:
      case BiluoTag::Outside: break;
    }
  }
  (void)open;
  return spans;
}

num::Matrix mask_invalid_transitions(const num::Matrix& transitions) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const std::size_t start = crf::start_state(kTagCount);
  const std::size_t stop = crf::stop_state(kTagCount);
  if (transitions.rows() != kTagCount + 2 || transitions.cols() != kTagCount + 2)
    throw std::invalid_argument("mask_invalid_transitions: expected 7x7 matrix");

  auto continues = [](BiluoTag t) { return t == BiluoTag::Inside || t == BiluoTag::Last; };
  auto opens_or_outside = [](BiluoTag t) {
    return t == BiluoTag::Begin || t == BiluoTag::Unit || t == BiluoTag::Outside;
  };

  num::Matrix m = transitions;
  for (std::size_t i = 0; i < kTagCount; ++i)
    for (std::size_t j = 0; j < kTagCount; ++j) {
      const BiluoTag from = static_cast<BiluoTag>(i);
      const BiluoTag to = static_cast<BiluoTag>(j);
      bool ok = false;
      switch (from) {
        case BiluoTag::Begin:
        case BiluoTag::Inside: ok = continues(to); break;
        case BiluoTag::Last:
        case BiluoTag::Unit:
        case BiluoTag::Outside: ok = opens_or_outside(to); break;
      }
      if (!ok) m(i, j) = kNegInf;
    }
  for (std::size_t j = 0; j < kTagCount; ++j) {
    const BiluoTag to = static_cast<BiluoTag>(j);
    if (!opens_or_outside(to)) m(start, j) = kNegInf;  // cannot begin mid-phrase
  }
  for (std::size_t i = 0; i < kTagCount; ++i) {
    const BiluoTag from = static_cast<BiluoTag>(i);
    // A phrase must be closed before the sequence ends.
    if (from == BiluoTag::Begin || from == BiluoTag::Inside) m(i, stop) = kNegInf;
  }
  return m;
}

}  // namespace ckg::phrasecrf
