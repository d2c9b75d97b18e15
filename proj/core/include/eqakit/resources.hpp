#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqakit/text.hpp"

namespace eqa::text {

enum class PosTag { kNoun, kAdj, kOther };

// Word embedding table. Vectors are L2-normalized at load time; keys are
// matched case-insensitively but surfaces are returned as stored.
struct EmbeddingTable {
  std::size_t dim = 0;
  std::vector<std::string> words;            // stored surfaces, insertion order
  std::vector<std::vector<double>> vectors;  // unit norm, parallel to words
  std::map<std::string, std::size_t> index;  // lowercased surface -> slot

  bool empty() const { return words.empty(); }
};

// Antonym pairs, POS lexicon, and word embeddings. Built once, then
// shared read-only; all lookups below are const.
struct LexicalResources {
  std::map<std::string, std::string> antonyms;  // stored symmetrically
  std::map<std::string, PosTag> pos_lexicon;
  EmbeddingTable embeddings;

  void add_antonym_pair(const std::string& a, const std::string& b);
  void add_pos(const std::string& word, PosTag tag);
  void add_embedding(const std::string& word, std::vector<double> vec);
};

// File formats (all UTF-8):
//   antonyms: one "word<TAB>antonym" per line
//   pos lexicon: one "word<TAB>{NOUN|ADJ|OTHER}" per line
//   embeddings: first line is the dimension, then "word v1 .. vd" lines
// Lines starting with '#' and blank lines are skipped.
LexicalResources load_resources(const std::string& antonyms_path,
                                const std::string& pos_path,
                                const std::string& embeddings_path);

// Convenience: loads antonyms.tsv, pos.tsv, embeddings.txt from dir.
// Missing files yield the corresponding empty resource.
LexicalResources load_resources_dir(const std::string& dir);

// Lexicon lookup first, then suffix heuristics (-ous/-ful/-ive/-al => ADJ,
// -tion/-ness/-ment => NOUN), else OTHER.
PosTag pos_tag_word(const std::string& word, const LexicalResources& res);
std::vector<PosTag> pos_tag(const std::vector<Token>& tokens, const LexicalResources& res);

// Lexicon lookup; nullopt when the word has no stored antonym.
std::optional<std::string> antonym(const std::string& word, const LexicalResources& res);

// Cosine-similarity argmax over the embedding vocabulary, excluding every
// word that appears in the phrase itself. The phrase vector is the mean of
// the in-vocabulary word vectors. Ties break by lexicographic order of the
// stored surface. Throws NoEmbedding when no phrase word is in the table.
std::string nearest_embedding_word(const std::string& phrase, const LexicalResources& res);

}  // namespace eqa::text
