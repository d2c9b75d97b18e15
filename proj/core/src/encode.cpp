#include "eqakit/encode.hpp"

#include <algorithm>
#include <set>

#include "eqakit/errors.hpp"
#include "eqakit/utf8.hpp"

namespace eqa::text {

Vocabulary::Vocabulary(const std::vector<std::string>& surfaces) {
  std::set<std::string> unique(surfaces.begin(), surfaces.end());
  surfaces_.assign(unique.begin(), unique.end());
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    ids_[surfaces_[i]] = kNumReserved + static_cast<std::int32_t>(i);
  }
}

Vocabulary Vocabulary::build(const std::vector<const data::Dataset*>& datasets) {
  std::vector<std::string> all;
  for (const data::Dataset* d : datasets) {
    for (const data::QAExample& ex : d->examples) {
      for (const Token& t : tokenize(ex.question)) all.push_back(t.surface);
      for (const Token& t : tokenize(ex.context)) all.push_back(t.surface);
    }
  }
  return Vocabulary(all);
}

std::int32_t Vocabulary::id_of(const std::string& surface) const {
  auto it = ids_.find(surface);
  return it == ids_.end() ? kUnk : it->second;
}

TokenizedSequence encode_pair(const std::string& question, const std::string& context,
                              const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 8) throw InvalidConfig("max_len must be >= 8");

  const std::vector<Token> q_tokens = tokenize(question);
  const std::vector<Token> c_tokens = tokenize(context);

  // [CLS] + question + [SEP] must fit with at least zero context tokens.
  if (q_tokens.size() + 2 > max_len) {
    throw QuestionTooLong("question has " + std::to_string(q_tokens.size()) +
                          " tokens; max_len " + std::to_string(max_len) +
                          " leaves no room");
  }

  TokenizedSequence seq;
  seq.n = max_len;
  seq.question = question;
  seq.context = context;
  seq.tokens.reserve(max_len);
  seq.surface.reserve(max_len);
  seq.char_spans.reserve(max_len);

  auto push = [&seq](std::int32_t id, std::string surface, CharSpan span) {
    seq.tokens.push_back(id);
    seq.surface.push_back(std::move(surface));
    seq.char_spans.push_back(span);
  };

  const CharSpan no_span{kNoSpanMarker, kNoSpanMarker};
  push(Vocabulary::kCls, "[CLS]", no_span);
  for (const Token& t : q_tokens) push(vocab.id_of(t.surface), t.surface, t.span);
  seq.sep_index = seq.tokens.size();
  push(Vocabulary::kSep, "[SEP]", no_span);
  seq.context_start = seq.tokens.size();

  const std::size_t context_budget = max_len - seq.tokens.size();
  seq.context_len = std::min(context_budget, c_tokens.size());
  for (std::size_t i = 0; i < seq.context_len; ++i) {
    push(vocab.id_of(c_tokens[i].surface), c_tokens[i].surface, c_tokens[i].span);
  }
  while (seq.tokens.size() < max_len) push(Vocabulary::kPad, "[PAD]", no_span);
  return seq;
}

std::optional<TokenSpan> align_answer(const data::AnswerRef& ans,
                                      const TokenizedSequence& seq) {
  const std::size_t ans_begin = ans.start;
  const std::size_t ans_end = ans.start + utf8::length(ans.text);

  std::optional<std::size_t> first, last;
  for (std::size_t k = seq.context_start; k < seq.context_start + seq.context_len; ++k) {
    const CharSpan& span = seq.char_spans[k];
    const bool overlaps = span.begin < ans_end && span.end > ans_begin;
    if (overlaps) {
      if (!first) first = k;
      last = k;
    }
  }
  if (!first) return std::nullopt;

  // A partially covered answer (tail truncated away) is out of window too.
  const CharSpan& last_span = seq.char_spans[*last];
  if (last_span.end < ans_end) {
    const std::size_t window_end =
        seq.char_spans[seq.context_start + seq.context_len - 1].end;
    if (ans_end > window_end) return std::nullopt;
  }
  return TokenSpan{*first, *last};
}

}  // namespace eqa::text
