#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqakit/dataset.hpp"
#include "eqakit/text.hpp"

namespace eqa::text {

// Token ids. Reserved ids come first; corpus tokens follow in sorted
// order, so ids are dense and stable for a fixed corpus.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::int32_t kSep = 3;
  static constexpr std::int32_t kNumReserved = 4;

  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& surfaces);

  // Collects every token surface of every question and context.
  static Vocabulary build(const std::vector<const data::Dataset*>& datasets);

  std::int32_t id_of(const std::string& surface) const;  // kUnk when absent
  std::size_t size() const { return kNumReserved + surfaces_.size(); }
  const std::vector<std::string>& surfaces() const { return surfaces_; }

 private:
  std::vector<std::string> surfaces_;
  std::map<std::string, std::int32_t> ids_;
};

// Sentinel span used for [CLS]/[SEP]/[PAD] positions.
inline constexpr CharSpan kNoSpan{0, 0};
inline constexpr std::size_t kNoSpanMarker = static_cast<std::size_t>(-1);

// The encoded <[CLS] question [SEP] context> pair, padded to max_len.
// char_spans of question tokens index the question, context tokens the
// context; special and pad positions hold {kNoSpanMarker, kNoSpanMarker}.
struct TokenizedSequence {
  std::vector<std::int32_t> tokens;
  std::vector<std::string> surface;
  std::vector<CharSpan> char_spans;
  std::size_t n = 0;            // == max_len
  std::size_t cls_index = 0;
  std::size_t sep_index = 0;
  std::size_t context_start = 0;   // first context token position
  std::size_t context_len = 0;     // number of context tokens kept
  std::string question;
  std::string context;

  bool is_context_token(std::size_t k) const {
    return k >= context_start && k < context_start + context_len;
  }
};

// Layout: [CLS] question [SEP] context [PAD]...; the context is truncated
// first when the pair exceeds max_len. Throws QuestionTooLong when the
// question plus specials alone do not fit. max_len must be >= 8.
TokenizedSequence encode_pair(const std::string& question, const std::string& context,
                              const Vocabulary& vocab, std::size_t max_len);

// Inclusive token span [first, last] into a TokenizedSequence.
struct TokenSpan {
  std::size_t first = 0;
  std::size_t last = 0;

  bool operator==(const TokenSpan&) const = default;
};

// First/last context tokens whose character spans cover the answer.
// nullopt means the answer lies (fully or partly) beyond the truncated
// window.
std::optional<TokenSpan> align_answer(const data::AnswerRef& ans,
                                      const TokenizedSequence& seq);

}  // namespace eqa::text
