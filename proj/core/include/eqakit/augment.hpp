#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eqakit/dataset.hpp"
#include "eqakit/resources.hpp"
#include "eqakit/rng.hpp"

namespace eqa::aug {

// Every synthetic answer must score below this token-F1 against each gold
// answer of its question.
inline constexpr double kMaxSyntheticF1 = 0.2;

enum class Provenance { kTemplate, kExternal };

// The audit trail of one augmented example. insert_offset is a sentence
// boundary of the ORIGINAL context; the statement contains the synthetic
// answer verbatim.
struct SyntheticRecord {
  std::string id;
  std::string synthetic_answer;
  std::string statement;
  std::size_t insert_offset = 0;
  Provenance provenance = Provenance::kTemplate;
  bool backend_fell_back = false;
};

// Where candidate synthetic answers come from.
//
// kEnsembleVote ranks the answers predicted for this example across the
// supplied prediction files by vote count (ties lexicographic) and takes
// the first that clears the F1 constraint. kEmbeddingSpan ranks context
// spans of at most max_span_tokens tokens by cosine similarity between
// the span's mean embedding and the gold's, skipping spans that overlap a
// gold answer.
struct CandidateProvider {
  enum class Strategy { kEnsembleVote, kEmbeddingSpan };

  Strategy strategy = Strategy::kEmbeddingSpan;
  std::vector<data::PredictionFile> prediction_files;   // kEnsembleVote
  const text::LexicalResources* resources = nullptr;    // kEmbeddingSpan
  std::size_t max_span_tokens = 4;

  static CandidateProvider ensemble_vote(std::vector<data::PredictionFile> files);
  static CandidateProvider embedding_span(const text::LexicalResources* res,
                                          std::size_t max_span_tokens = 4);
};

// nullopt when every candidate violates the F1-below-0.2 constraint.
std::optional<std::string> select_synthetic_answer(const data::QAExample& ex,
                                                   const CandidateProvider& provider);

struct StatementResult {
  std::string text;
  Provenance provenance = Provenance::kTemplate;
  bool fell_back = false;  // external backend unavailable or answer missing
};

// Turns (question, answer) into a declarative statement that contains the
// answer verbatim.
class StatementBackend {
 public:
  virtual ~StatementBackend() = default;
  virtual StatementResult generate(const std::string& question, const std::string& answer) = 0;
};

// Deterministic rule-based backend built on the attack declarativizer.
class TemplateBackend : public StatementBackend {
 public:
  explicit TemplateBackend(const text::LexicalResources& resources) : resources_(&resources) {}
  StatementResult generate(const std::string& question, const std::string& answer) override;

 private:
  const text::LexicalResources* resources_;
};

// POSTs {"prompt": ...} to url and expects {"text": ...} back. A bearer
// token is read from the EQAKIT_API_TOKEN environment variable when set.
// Responses that do not contain the answer verbatim, and transport
// failures, fall back to the template backend.
class HttpBackend : public StatementBackend {
 public:
  HttpBackend(std::string url, const text::LexicalResources& resources);
  StatementResult generate(const std::string& question, const std::string& answer) override;

  // The completion prompt sent to the endpoint, with its two fixed
  // few-shot examples.
  static std::string build_prompt(const std::string& question, const std::string& answer);

 private:
  std::string url_;
  TemplateBackend fallback_;
};

// Uniform draw over the internal sentence boundaries (never before the
// first or after the last sentence). nullopt for single-sentence contexts.
std::optional<std::pair<std::string, std::size_t>> insert_statement(
    const std::string& context, const std::string& statement, rng::Stream& stream);

struct AugmentResult {
  data::Dataset dataset;                 // input order preserved
  std::vector<SyntheticRecord> records;  // one per augmented example
  std::size_t quota = 0;                 // floor(fraction * answerable)
  std::size_t augmented = 0;
  std::size_t skipped = 0;               // candidates that failed and were replaced
};

// Adds a synthetic second answer to floor(fraction * answerable) examples,
// drawn uniformly; failed candidates are replaced by fresh draws until the
// quota is met or the pool runs out (augmented < quota then signals the
// shortfall). Unanswerable examples are never touched.
AugmentResult augment_dataset(const data::Dataset& d, double fraction,
                              const CandidateProvider& provider, StatementBackend& backend,
                              std::uint64_t seed);

// The misleading-information probe: replaces each inserted statement with
// the bare synthetic answer and drops that answer from the gold set, so
// only the original golds remain. Throws RecordMismatch when a record does
// not line up with d.
data::Dataset strip_support_sentence(const data::Dataset& d,
                                     const std::vector<SyntheticRecord>& records);

}  // namespace eqa::aug
