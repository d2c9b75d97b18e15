#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eqakit/dataset.hpp"
#include "eqakit/resources.hpp"
#include "eqakit/rng.hpp"

namespace eqa::attack {

enum class Kind { kAddOneSent, kNegation };

// Where the distractor sentence may be spliced into the context.
// kRandom draws uniformly over sentence boundaries including the end of
// the context; kEnd always appends.
enum class Placement { kRandom, kEnd };

// One attacked example. The question and gold answer texts are identical
// to the base example; only the context changes, and the gold offsets are
// re-mapped so they still validate against it.
struct AttackedExample {
  data::QAExample base;
  Kind attack = Kind::kAddOneSent;
  std::string attack_sentence;
  std::size_t insert_offset = 0;  // code-point boundary in the base context
  std::string context_attacked;
  std::vector<data::AnswerRef> remapped_golds;

  data::QAExample to_example() const;
};

// Either an attacked example or the reason this example was skipped.
struct Outcome {
  std::optional<AttackedExample> attacked;
  std::string skip_reason;

  bool ok() const { return attacked.has_value(); }
};

// Substitutes every noun/adjective that has a lexicon antonym; keeps the
// casing of replaced sentence-initial words. nullopt when nothing was
// replaceable (the attack is skipped for such questions).
std::optional<std::string> modify_question_aos(const std::string& question,
                                               const text::LexicalResources& resources);

// Embedding-nearest word to the gold answer; never shares a token with
// the gold. Throws NoEmbedding when the gold is fully out of vocabulary.
std::string fake_answer(const std::string& gold_text, const text::LexicalResources& resources);

// Rule-based declarativization: the wh-word (plus, for what/which/whose,
// the noun phrase it heads) is replaced by the fake answer; do-support is
// dropped; everything else is kept verbatim. Questions without a wh-word
// fall back to "<Fake> <question words>."; the result is always
// capitalized and period-terminated.
std::string statement_from(const std::string& question_form, const std::string& fake,
                           const text::LexicalResources& resources);

// Distractor sentence from the antonym-modified question and the fake
// answer, spliced at an rng-chosen sentence boundary.
Outcome attack_add_one_sent(const data::QAExample& ex, const text::LexicalResources& resources,
                            rng::Stream& stream, Placement placement = Placement::kRandom);

// High-overlap statement from the unmodified question with "not" inserted
// before its first adjective, plus the same fake answer.
Outcome attack_negation(const data::QAExample& ex, const text::LexicalResources& resources,
                        rng::Stream& stream, Placement placement = Placement::kRandom);

struct ManifestEntry {
  std::string id;
  bool attacked = false;
  std::string reason;            // empty when attacked
  std::string sentence;          // empty when skipped
  std::size_t insert_offset = 0;
};

struct RunResult {
  data::Dataset attacked;
  std::vector<ManifestEntry> manifest;
  std::size_t skipped = 0;
};

// Attacks every answerable example of d with a per-example rng stream
// derived from (seed, id), so outputs do not depend on iteration order.
// Unanswerable examples are skipped and counted.
RunResult attack_dataset(const data::Dataset& d, Kind kind,
                         const text::LexicalResources& resources, std::uint64_t seed,
                         Placement placement = Placement::kRandom);

std::string kind_name(Kind kind);

}  // namespace eqa::attack
