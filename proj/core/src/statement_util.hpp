#pragma once

#include <optional>
#include <string>
#include <utility>

#include "eqakit/utf8.hpp"

namespace eqa::detail {

// Locates the answer inside a generated statement. Statements are
// sentence-capitalized, so an answer that leads the statement may only
// match with its first letter uppercased; the matched form is returned so
// callers can store an offset-consistent answer text.
inline std::optional<std::pair<std::size_t, std::string>> find_answer_in_statement(
    const std::string& statement, const std::string& answer) {
  const std::u32string stmt = utf8::decode(statement);
  const std::u32string ans = utf8::decode(answer);
  if (ans.empty()) return std::nullopt;

  auto try_find = [&stmt](const std::u32string& needle)
      -> std::optional<std::pair<std::size_t, std::string>> {
    const std::size_t at = stmt.find(needle);
    if (at == std::u32string::npos) return std::nullopt;
    return std::make_pair(at, utf8::encode(needle));
  };

  if (auto hit = try_find(ans)) return hit;
  if (ans[0] >= U'a' && ans[0] <= U'z') {
    std::u32string cap = ans;
    cap[0] -= 32;
    return try_find(cap);
  }
  return std::nullopt;
}

}  // namespace eqa::detail
