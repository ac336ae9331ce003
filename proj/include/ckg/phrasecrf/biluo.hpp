#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ckg/corpus/types.hpp"
#include "ckg/num/matrix.hpp"

namespace ckg::phrasecrf {

enum class BiluoTag { Begin = 0, Inside = 1, Last = 2, Unit = 3, Outside = 4 };
inline constexpr std::size_t kTagCount = 5;

char tag_char(BiluoTag t);
std::string tags_to_string(const std::vector<BiluoTag>& tags);
std::vector<BiluoTag> tags_from_string(const std::string& s);

using TagSequence = std::vector<BiluoTag>;

enum class AlignMode {
  Strict,  // spans must coincide with token boundaries
  Snap,    // spans are widened outward to the overlapped tokens
};

// Tags one sentence's tokens against a non-overlapping span set.
// In Snap mode, *snapped_count (if given) is incremented per adjusted span.
TagSequence biluo_encode(const corpus::Sentence& sentence,
                         const std::vector<corpus::PhraseSpan>& spans,
                         AlignMode mode = AlignMode::Strict, std::size_t* snapped_count = nullptr);

// Inverse of biluo_encode. Invalid sequences are repaired first, so decoding
// is total. tags[i] labels sentence.tokens[token_indices[i]]; pass the
// identity (default) when no words were truncated.
std::vector<corpus::PhraseSpan> biluo_decode(const corpus::Sentence& sentence,
                                             const TagSequence& tags);
std::vector<corpus::PhraseSpan> biluo_decode(const corpus::Sentence& sentence,
                                             const TagSequence& tags,
                                             const std::vector<std::size_t>& token_indices);

bool is_valid_biluo(const TagSequence& tags);

// Total repair: dangling I/L is promoted to B when a continuation follows,
// demoted to O otherwise; an unterminated B/I is closed (B->U, I->L) when a
// non-continuation tag or the sequence end follows. Valid input is returned
// unchanged.
TagSequence repair_biluo(const TagSequence& tags);

// Transition mask for constrained decoding: BILUO-invalid transitions
// (including start/stop) are set to -infinity on a copy of `transitions`.
num::Matrix mask_invalid_transitions(const num::Matrix& transitions);

}  // namespace ckg::phrasecrf
