#pragma once

#include <string>

#include "eqakit/dataset.hpp"
#include "eqakit/resources.hpp"

// Shared test fixtures: a small desert-geography QA example with its two
// known attack sentences, a genocide-convention example for augmentation,
// and the lexical resources both of them need.

namespace eqa::testsupport {

extern const std::string kDesertQuestion;
extern const std::string kDesertContext;  // two sentences
extern const std::string kDesertGold;     // "Colorado River"

extern const std::string kAosSentence;
extern const std::string kNegationSentence;

extern const std::string kGenocideQuestion;
extern const std::string kGenocideContext;  // two sentences
extern const std::string kGenocideGold;
extern const std::string kSyntheticAnswer;     // "Resolution 46/3"
extern const std::string kSyntheticStatement;  // the templated statement

// QAExample for the desert fixture; the gold offset is computed, not
// hard-coded.
data::QAExample desert_example();
data::QAExample genocide_example();

// Antonym east<->west, small POS lexicon, and an embedding table where
// "Sea" is the nearest neighbour of "Colorado River".
text::LexicalResources canonical_resources();

// Writes antonyms.tsv / pos.tsv / embeddings.txt with the canonical
// contents into dir (which must exist).
void write_resource_files(const std::string& dir);

// Code-point offset of the first occurrence of needle, which must exist.
std::size_t offset_of(const std::string& haystack, const std::string& needle);

}  // namespace eqa::testsupport
