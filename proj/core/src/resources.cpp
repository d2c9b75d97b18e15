#include "eqakit/resources.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "eqakit/errors.hpp"

namespace eqa::text {

namespace {

std::string lower_ascii(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool ends_with(const std::string& word, const std::string& suffix) {
  return word.size() > suffix.size() &&
         word.compare(word.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open resource file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

PosTag parse_tag(const std::string& tag, const std::string& path) {
  if (tag == "NOUN") return PosTag::kNoun;
  if (tag == "ADJ") return PosTag::kAdj;
  if (tag == "OTHER") return PosTag::kOther;
  throw MalformedFile("unknown POS tag '" + tag + "' in " + path);
}

}  // namespace

void LexicalResources::add_antonym_pair(const std::string& a, const std::string& b) {
  antonyms[lower_ascii(a)] = b;
  antonyms[lower_ascii(b)] = a;
}

void LexicalResources::add_pos(const std::string& word, PosTag tag) {
  pos_lexicon[lower_ascii(word)] = tag;
}

void LexicalResources::add_embedding(const std::string& word, std::vector<double> vec) {
  if (embeddings.dim == 0) embeddings.dim = vec.size();
  if (vec.size() != embeddings.dim) {
    throw MalformedFile("embedding dimension mismatch for word '" + word + "'");
  }
  double norm = 0.0;
  for (double v : vec) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) {
    throw MalformedFile("zero-norm embedding vector for word '" + word + "'");
  }
  for (double& v : vec) v /= norm;
  const std::string key = lower_ascii(word);
  auto it = embeddings.index.find(key);
  if (it != embeddings.index.end()) {
    embeddings.words[it->second] = word;
    embeddings.vectors[it->second] = std::move(vec);
    return;
  }
  embeddings.index[key] = embeddings.words.size();
  embeddings.words.push_back(word);
  embeddings.vectors.push_back(std::move(vec));
}

LexicalResources load_resources(const std::string& antonyms_path,
                                const std::string& pos_path,
                                const std::string& embeddings_path) {
  LexicalResources res;
  if (!antonyms_path.empty()) {
    for (const std::string& line : read_lines(antonyms_path)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw MalformedFile("expected 'word<TAB>antonym' in " + antonyms_path + ": " + line);
      }
      res.add_antonym_pair(line.substr(0, tab), line.substr(tab + 1));
    }
  }
  if (!pos_path.empty()) {
    for (const std::string& line : read_lines(pos_path)) {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw MalformedFile("expected 'word<TAB>tag' in " + pos_path + ": " + line);
      }
      res.add_pos(line.substr(0, tab), parse_tag(line.substr(tab + 1), pos_path));
    }
  }
  if (!embeddings_path.empty()) {
    const auto lines = read_lines(embeddings_path);
    if (lines.empty()) throw MalformedFile("empty embedding file: " + embeddings_path);
    std::size_t dim = 0;
    try {
      dim = static_cast<std::size_t>(std::stoul(lines[0]));
    } catch (const std::exception&) {
      throw MalformedFile("first embedding line must be the dimension: " + embeddings_path);
    }
    if (dim == 0) throw MalformedFile("embedding dimension must be positive");
    res.embeddings.dim = dim;
    for (std::size_t li = 1; li < lines.size(); ++li) {
      std::istringstream ss(lines[li]);
      std::string word;
      ss >> word;
      std::vector<double> vec(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        if (!(ss >> vec[d])) {
          throw MalformedFile("short embedding row for word '" + word + "' in " +
                              embeddings_path);
        }
      }
      res.add_embedding(word, std::move(vec));
    }
  }
  return res;
}

LexicalResources load_resources_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  auto pick = [&](const char* name) -> std::string {
    const fs::path p = fs::path(dir) / name;
    return fs::exists(p) ? p.string() : std::string{};
  };
  return load_resources(pick("antonyms.tsv"), pick("pos.tsv"), pick("embeddings.txt"));
}

PosTag pos_tag_word(const std::string& word, const LexicalResources& res) {
  const std::string key = lower_ascii(word);
  auto it = res.pos_lexicon.find(key);
  if (it != res.pos_lexicon.end()) return it->second;
  for (const char* s : {"ous", "ful", "ive", "al"}) {
    if (ends_with(key, s)) return PosTag::kAdj;
  }
  for (const char* s : {"tion", "ness", "ment"}) {
    if (ends_with(key, s)) return PosTag::kNoun;
  }
  return PosTag::kOther;
}

std::vector<PosTag> pos_tag(const std::vector<Token>& tokens, const LexicalResources& res) {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const Token& t : tokens) tags.push_back(pos_tag_word(t.surface, res));
  return tags;
}

std::optional<std::string> antonym(const std::string& word, const LexicalResources& res) {
  auto it = res.antonyms.find(lower_ascii(word));
  if (it == res.antonyms.end()) return std::nullopt;
  return it->second;
}

std::string nearest_embedding_word(const std::string& phrase, const LexicalResources& res) {
  const EmbeddingTable& table = res.embeddings;
  if (table.empty()) throw NoEmbedding("embedding table is empty");

  std::set<std::string> phrase_words;
  std::vector<double> mean(table.dim, 0.0);
  std::size_t found = 0;
  for (const Token& tok : tokenize(phrase)) {
    phrase_words.insert(tok.surface);
    auto it = table.index.find(tok.surface);
    if (it == table.index.end()) continue;
    const auto& v = table.vectors[it->second];
    for (std::size_t d = 0; d < table.dim; ++d) mean[d] += v[d];
    ++found;
  }
  if (found == 0) {
    throw NoEmbedding("no word of phrase '" + phrase + "' is in the embedding table");
  }
  for (double& v : mean) v /= static_cast<double>(found);

  // All stored vectors are unit norm, so the dot product ranks cosines.
  bool have_best = false;
  double best_score = 0.0;
  std::size_t best_slot = 0;
  for (std::size_t slot = 0; slot < table.words.size(); ++slot) {
    const std::string key = lower_ascii(table.words[slot]);
    if (phrase_words.count(key)) continue;
    double dot = 0.0;
    for (std::size_t d = 0; d < table.dim; ++d) dot += mean[d] * table.vectors[slot][d];
    if (!have_best || dot > best_score ||
        (dot == best_score && table.words[slot] < table.words[best_slot])) {
      have_best = true;
      best_score = dot;
      best_slot = slot;
    }
  }
  if (!have_best) {
    throw NoEmbedding("every table word appears in phrase '" + phrase + "'");
  }
  return table.words[best_slot];
}

}  // namespace eqa::text
