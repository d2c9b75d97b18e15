#pragma once

#include <cstddef>
#include <string>

#include "eqakit/encoder.hpp"

namespace eqa::infer {

// How a trained model signals "no answer". kClsSpan is the convention for
// default-loss models: the (0,0) span at the classification token encodes
// empty. kNegativeMax is the convention for combined-loss models: empty
// whenever the best context span score s_i + e_j is strictly negative.
enum class Mode { kClsSpan, kNegativeMax };

struct SpanChoice {
  std::size_t first = 0;
  std::size_t last = 0;
  double score = 0.0;
};

struct Prediction {
  bool empty = false;
  SpanChoice span;    // for empty predictions: the score that lost/triggered
  std::string text;   // "" when empty
};

inline constexpr std::size_t kDefaultMaxAnswerLen = 30;
inline constexpr std::size_t kUnlimitedAnswerLen = static_cast<std::size_t>(-1);

// Argmax of s_i + e_j over context token spans with i <= j and
// j - i + 1 <= max_answer_len. Ties break toward the smallest i, then the
// smallest j. Throws NoValidSpan when the sequence kept no context tokens.
SpanChoice best_span(const nn::HeadLogits& logits, const text::TokenizedSequence& seq,
                     std::size_t max_answer_len = kDefaultMaxAnswerLen);

// Applies the mode's empty rule on top of the span search and extracts the
// answer text from the original context.
Prediction predict(const nn::HeadLogits& logits, const text::TokenizedSequence& seq,
                   Mode mode, std::size_t max_answer_len = kDefaultMaxAnswerLen);

// Original-context substring covering tokens [first, last], straight from
// the character spans (original casing, not re-joined token surfaces).
std::string extract_text(const text::TokenizedSequence& seq, const text::TokenSpan& span);

}  // namespace eqa::infer
