#include "eqakit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "eqakit/utf8.hpp"

namespace eqa::text {

namespace {

char32_t to_lower_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  // Latin-1 uppercase block, excluding the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  return cp;
}

bool is_upper_cp(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return true;
  return cp >= 0xC0 && cp <= 0xDE && cp != 0xD7;
}

bool is_digit_cp(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

// Sentence-terminal punctuation preceded by one of these (lowercased,
// period excluded) does not end a sentence.
const std::array<std::string, 16> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st",
    "etc", "vs", "fig", "no", "inc", "ltd", "co", "approx"};

}  // namespace

bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || is_digit_cp(cp);
  }
  // Latin-1 letters plus the Latin extended / Greek / Cyrillic blocks.
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x24F) return true;
  if (cp >= 0x370 && cp <= 0x4FF) return true;
  return false;
}

bool is_space_char(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
         cp == U'\v' || cp == 0xA0;
}

std::vector<Token> tokenize(const std::string& text) {
  const std::u32string cps = utf8::decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    if (is_space_char(cps[i])) {
      ++i;
      continue;
    }
    if (is_word_char(cps[i])) {
      std::size_t j = i;
      std::u32string word;
      while (j < n && is_word_char(cps[j])) {
        word.push_back(to_lower_cp(cps[j]));
        ++j;
      }
      tokens.push_back(Token{utf8::encode(word), {i, j}});
      i = j;
    } else {
      // One token per punctuation/symbol code point.
      tokens.push_back(Token{utf8::encode(std::u32string(1, cps[i])), {i, i + 1}});
      ++i;
    }
  }
  return tokens;
}

std::string normalize_answer(const std::string& text) {
  const std::u32string cps = utf8::decode(text);
  std::u32string kept;
  kept.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (is_word_char(cp) || is_space_char(cp)) {
      kept.push_back(to_lower_cp(cp));
      continue;
    }
    // Keep separators embedded in numbers ("46/3", "1,000").
    const bool digit_left = i > 0 && is_digit_cp(cps[i - 1]);
    const bool digit_right = i + 1 < cps.size() && is_digit_cp(cps[i + 1]);
    if (digit_left && digit_right) kept.push_back(cp);
  }

  // Split on whitespace, drop articles, re-join with single spaces.
  std::u32string out;
  std::size_t i = 0;
  while (i < kept.size()) {
    while (i < kept.size() && is_space_char(kept[i])) ++i;
    std::size_t j = i;
    while (j < kept.size() && !is_space_char(kept[j])) ++j;
    if (j > i) {
      const std::u32string word = kept.substr(i, j - i);
      if (word != U"a" && word != U"an" && word != U"the") {
        if (!out.empty()) out.push_back(U' ');
        out += word;
      }
    }
    i = j;
  }
  return utf8::encode(out);
}

std::vector<std::size_t> sentence_boundaries(const std::string& context) {
  const std::u32string cps = utf8::decode(context);
  std::vector<std::size_t> boundaries;
  const std::size_t n = cps.size();
  for (std::size_t i = 0; i < n; ++i) {
    const char32_t cp = cps[i];
    if (cp != U'.' && cp != U'!' && cp != U'?') continue;

    // Scan past any run of closing punctuation (e.g. ." or ?)).
    std::size_t j = i + 1;
    while (j < n && (cps[j] == U'"' || cps[j] == 0x201D || cps[j] == U'\'' || cps[j] == U')')) ++j;
    if (j >= n || !is_space_char(cps[j])) continue;
    std::size_t k = j;
    while (k < n && is_space_char(cps[k])) ++k;
    if (k >= n || !is_upper_cp(cps[k])) continue;

    if (cp == U'.') {
      // Word immediately before the period.
      std::size_t w_end = i;
      std::size_t w_begin = w_end;
      while (w_begin > 0 && is_word_char(cps[w_begin - 1])) --w_begin;
      std::u32string prev;
      for (std::size_t p = w_begin; p < w_end; ++p) prev.push_back(to_lower_cp(cps[p]));
      const std::string prev_word = utf8::encode(prev);
      if (std::find(kAbbreviations.begin(), kAbbreviations.end(), prev_word) !=
          kAbbreviations.end()) {
        continue;
      }
    }
    boundaries.push_back(k);
    i = k - 1;
  }
  return boundaries;
}

}  // namespace eqa::text
