#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace eqa::text {

// Half-open character range [begin, end) in code-point units.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

// One surface token with its location in the source text.
struct Token {
  std::string surface;  // lowercased
  CharSpan span;

  bool operator==(const Token&) const = default;
};

// Lowercased word/punctuation tokenization. Words are maximal runs of
// letters and digits; every other non-space character is its own token.
// Offsets index the original (unlowercased) text in code points.
std::vector<Token> tokenize(const std::string& text);

// SQuAD-style answer normalization: lowercase, drop punctuation (except
// separators sitting between two digits, so "46/3" survives), remove the
// articles a/an/the, collapse whitespace.
std::string normalize_answer(const std::string& text);

// Code-point offsets at which sentences 2..k start. Splits after ./!/?
// followed by whitespace and an uppercase letter, with a stop-list of
// common abbreviations. Empty result means the text is one sentence.
std::vector<std::size_t> sentence_boundaries(const std::string& context);

// Classification used by the tokenizer and normalizer.
bool is_word_char(char32_t cp);
bool is_space_char(char32_t cp);

}  // namespace eqa::text
