#include "eqakit/inference.hpp"

#include "eqakit/errors.hpp"
#include "eqakit/utf8.hpp"

namespace eqa::infer {

SpanChoice best_span(const nn::HeadLogits& logits, const text::TokenizedSequence& seq,
                     std::size_t max_answer_len) {
  if (seq.context_len == 0) {
    throw NoValidSpan("sequence kept no context tokens");
  }
  if (max_answer_len == 0) max_answer_len = kUnlimitedAnswerLen;

  const std::size_t begin = seq.context_start;
  const std::size_t end = seq.context_start + seq.context_len;
  bool have = false;
  SpanChoice best;
  for (std::size_t i = begin; i < end; ++i) {
    const std::size_t j_cap =
        max_answer_len == kUnlimitedAnswerLen ? end - 1 : std::min(end - 1, i + max_answer_len - 1);
    for (std::size_t j = i; j <= j_cap; ++j) {
      const double score = logits.s[static_cast<Eigen::Index>(i)] +
                           logits.e[static_cast<Eigen::Index>(j)];
      if (!have || score > best.score) {
        have = true;
        best = {i, j, score};
      }
    }
  }
  return best;
}

Prediction predict(const nn::HeadLogits& logits, const text::TokenizedSequence& seq,
                   Mode mode, std::size_t max_answer_len) {
  Prediction out;
  const SpanChoice ctx_best = best_span(logits, seq, max_answer_len);

  if (mode == Mode::kClsSpan) {
    // The (0,0) span competes with the context spans; equal scores resolve
    // to the smaller index pair, i.e. to (0,0).
    const double cls_score = logits.s[0] + logits.e[0];
    if (cls_score >= ctx_best.score) {
      out.empty = true;
      out.span = {0, 0, cls_score};
      return out;
    }
    out.span = ctx_best;
  } else {
    // Empty iff the best score is strictly negative; exactly zero is a span.
    if (ctx_best.score < 0.0) {
      out.empty = true;
      out.span = ctx_best;
      return out;
    }
    out.span = ctx_best;
  }
  out.text = extract_text(seq, text::TokenSpan{out.span.first, out.span.last});
  return out;
}

std::string extract_text(const text::TokenizedSequence& seq, const text::TokenSpan& span) {
  if (span.first > span.last || !seq.is_context_token(span.first) ||
      !seq.is_context_token(span.last)) {
    throw SpanOutOfRange("token span [" + std::to_string(span.first) + ", " +
                         std::to_string(span.last) + "] is not a context span");
  }
  const std::size_t begin = seq.char_spans[span.first].begin;
  const std::size_t end = seq.char_spans[span.last].end;
  const std::u32string ctx = utf8::decode(seq.context);
  return utf8::encode(utf8::slice(ctx, begin, end));
}

}  // namespace eqa::infer
