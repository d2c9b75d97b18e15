#pragma once

#include <string>
#include <vector>

#include "eqakit/dataset.hpp"
#include "eqakit/text.hpp"
#include "eqakit/utf8.hpp"

// Shared sentence-splicing helpers for the attack and augmentation
// generators. Offsets are code-point based throughout.

namespace eqa::detail {

// Inserts sentence at boundary b. Internal boundaries splice
// "<sentence> " before the suffix; b == length(context) appends
// " <sentence>" instead.
inline std::string splice_sentence(const std::string& context, const std::string& sentence,
                                   std::size_t b) {
  const std::u32string ctx = utf8::decode(context);
  const std::u32string stmt = utf8::decode(sentence);
  if (b >= ctx.size()) {
    if (ctx.empty()) return sentence;
    std::u32string out = ctx;
    out.push_back(U' ');
    out += stmt;
    return utf8::encode(out);
  }
  std::u32string out = ctx.substr(0, b);
  out += stmt;
  out.push_back(U' ');
  out += ctx.substr(b);
  return utf8::encode(out);
}

// Candidate insertion points: internal sentence boundaries (optionally
// plus the end of the context), minus any boundary that falls strictly
// inside a gold answer range.
inline std::vector<std::size_t> insertion_points(const std::string& context,
                                                 const std::vector<data::AnswerRef>& golds,
                                                 bool include_end) {
  std::vector<std::size_t> points = text::sentence_boundaries(context);
  if (include_end) points.push_back(utf8::length(context));
  std::vector<std::size_t> kept;
  for (std::size_t b : points) {
    bool inside_gold = false;
    for (const data::AnswerRef& g : golds) {
      const std::size_t g_end = g.start + utf8::length(g.text);
      if (b > g.start && b < g_end) {
        inside_gold = true;
        break;
      }
    }
    if (!inside_gold) kept.push_back(b);
  }
  return kept;
}

// Gold offsets after an insertion of `inserted_len` code points (the
// sentence plus its separating space) at boundary b.
inline std::vector<data::AnswerRef> remap_golds(const std::vector<data::AnswerRef>& golds,
                                                std::size_t b, std::size_t inserted_len) {
  std::vector<data::AnswerRef> out = golds;
  for (data::AnswerRef& g : out) {
    if (g.start >= b) g.start += inserted_len;
  }
  return out;
}

// The context's sentences with surrounding whitespace trimmed.
inline std::vector<std::string> split_sentences(const std::string& context) {
  const std::u32string ctx = utf8::decode(context);
  std::vector<std::size_t> bounds = text::sentence_boundaries(context);
  bounds.push_back(ctx.size());
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (std::size_t b : bounds) {
    std::size_t lo = begin, hi = b;
    while (lo < hi && text::is_space_char(ctx[lo])) ++lo;
    while (hi > lo && text::is_space_char(ctx[hi - 1])) --hi;
    if (hi > lo) out.push_back(utf8::encode(ctx.substr(lo, hi - lo)));
    begin = b;
  }
  return out;
}

}  // namespace eqa::detail
