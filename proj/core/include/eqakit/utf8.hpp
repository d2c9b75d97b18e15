#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 <-> code point helpers. All character offsets in this
// library count Unicode scalar values, not bytes, so every string that
// carries offsets goes through these.

namespace eqa::utf8 {

// Decodes a UTF-8 string into code points. Invalid sequences decode as
// U+FFFD, one replacement per bad byte, so offsets stay monotone.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view code_points);

// Number of code points in a UTF-8 string.
std::size_t length(std::string_view text);

// Substring by code-point range [begin, end).
std::u32string slice(const std::u32string& text, std::size_t begin, std::size_t end);

}  // namespace eqa::utf8
