#pragma once

#include <map>
#include <string>
#include <vector>

namespace eqa::data {

// One gold answer: its text and the code-point offset of its first
// character in the context.
struct AnswerRef {
  std::string text;
  std::size_t start = 0;

  bool operator==(const AnswerRef&) const = default;
};

// One question/context record. is_answerable is true exactly when
// gold_answers is non-empty; validate() enforces this and the offsets.
struct QAExample {
  std::string id;
  std::string question;
  std::string context;
  std::vector<AnswerRef> gold_answers;
  bool is_answerable = false;

  void validate() const;  // throws OffsetMismatch / MalformedFile
};

struct Dataset {
  std::string name;
  std::vector<QAExample> examples;

  void validate() const;  // per-example checks plus id uniqueness
};

// Maps example id to predicted answer text (empty string = no answer).
using PredictionFile = std::map<std::string, std::string>;

// SQuAD v2 JSON (data[].paragraphs[].qas[] with is_impossible). Offsets are
// validated on load; any mismatch is an error, never silently repaired.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& d, const std::string& path);

PredictionFile load_predictions(const std::string& path);
void save_predictions(const PredictionFile& p, const std::string& path);

// Every prediction key must name an example of d.
void validate_predictions(const PredictionFile& p, const Dataset& d);

}  // namespace eqa::data
