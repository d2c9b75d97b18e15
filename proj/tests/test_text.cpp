#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "eqakit/errors.hpp"
#include "eqakit/resources.hpp"
#include "eqakit/rng.hpp"
#include "eqakit/text.hpp"
#include "eqakit/utf8.hpp"
#include "fixtures.hpp"

using namespace eqa;

TEST_CASE("tokenize splits lowercased words with offsets") {
  const auto tokens = text::tokenize("Colorado River");
  REQUIRE(tokens.size() == 2);
  CHECK(tokens[0].surface == "colorado");
  CHECK(tokens[0].span == text::CharSpan{0, 8});
  CHECK(tokens[1].surface == "river");
  CHECK(tokens[1].span == text::CharSpan{9, 14});
}

TEST_CASE("tokenize of empty text is empty") {
  CHECK(text::tokenize("").empty());
}

TEST_CASE("tokenize treats dashes and periods as their own tokens") {
  const std::string input = "Mexico–United States border.";
  const auto tokens = text::tokenize(input);

  std::size_t words = 0, punct = 0;
  const std::u32string cps = utf8::decode(input);
  for (const auto& tok : tokens) {
    // Slicing the original at the reported span reproduces the surface.
    std::string sliced = utf8::encode(utf8::slice(cps, tok.span.begin, tok.span.end));
    std::transform(sliced.begin(), sliced.end(), sliced.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    CHECK(sliced == tok.surface);
    if (tok.span.end - tok.span.begin == 1 && !text::is_word_char(utf8::decode(tok.surface)[0])) {
      ++punct;
    } else {
      ++words;
    }
  }
  CHECK(words == 4);
  CHECK(punct == 2);
}

TEST_CASE("tokenize offsets always slice back to the surface") {
  rng::Stream stream(7);
  const std::string alphabet = "abc XYZ.,!?–é 12";
  for (int trial = 0; trial < 50; ++trial) {
    std::u32string text;
    const std::u32string pool = utf8::decode(alphabet);
    const std::size_t len = stream.next_index(40);
    for (std::size_t i = 0; i < len; ++i) text.push_back(pool[stream.next_index(pool.size())]);
    const std::string input = utf8::encode(text);

    for (const auto& tok : text::tokenize(input)) {
      CHECK(tok.span.end > tok.span.begin);
      CHECK(tok.span.end <= text.size());
      CHECK(!tok.surface.empty());
    }
  }
}

TEST_CASE("normalize_answer drops articles and punctuation") {
  CHECK(text::normalize_answer("the Colorado River") == "colorado river");
  CHECK(text::normalize_answer("") == "");
  CHECK(text::normalize_answer("A hammer, an anvil.") == "hammer anvil");
}

TEST_CASE("normalize_answer keeps separators between digits") {
  CHECK(text::normalize_answer("Resolution 46/3") == "resolution 46/3");
  CHECK(text::normalize_answer("1,000 people") == "1,000 people");
  CHECK(text::normalize_answer("non-com") == "noncom");
}

TEST_CASE("sentence_boundaries finds internal boundaries") {
  SUBCASE("two short sentences") {
    const auto bounds = text::sentence_boundaries("A. B.");
    REQUIRE(bounds.size() == 1);
    CHECK(bounds[0] == 3);
  }
  SUBCASE("three sentences") {
    const std::string ctx = testsupport::kDesertContext + " " + testsupport::kAosSentence;
    CHECK(text::sentence_boundaries(ctx).size() == 2);
  }
  SUBCASE("no terminal punctuation") {
    CHECK(text::sentence_boundaries("no punctuation here at all").empty());
  }
  SUBCASE("abbreviations do not split") {
    CHECK(text::sentence_boundaries("Dr. Watson arrived.").empty());
  }
}

TEST_CASE("pos_tag uses the lexicon, then suffixes") {
  const auto res = testsupport::canonical_resources();
  CHECK(text::pos_tag_word("east", res) == text::PosTag::kAdj);
  CHECK(text::pos_tag_word("zzqx", res) == text::PosTag::kOther);
  CHECK(text::pos_tag_word("national", res) == text::PosTag::kAdj);
  CHECK(text::pos_tag_word("resolution", res) == text::PosTag::kNoun);
  CHECK(text::pos_tag_word("happiness", res) == text::PosTag::kNoun);
}

TEST_CASE("antonym lookup is symmetric") {
  const auto res = testsupport::canonical_resources();
  CHECK(text::antonym("east", res) == std::string("west"));
  CHECK(!text::antonym("purple", res).has_value());
  for (const auto& [word, other] : res.antonyms) {
    const auto back = text::antonym(other, res);
    REQUIRE(back.has_value());
    CHECK(*back == word);
  }
}

namespace {

// Independent scan used as the oracle for nearest_embedding_word.
std::string brute_force_nearest(const std::string& phrase, const text::LexicalResources& res) {
  const auto& table = res.embeddings;
  std::vector<std::string> phrase_words;
  for (const auto& tok : text::tokenize(phrase)) phrase_words.push_back(tok.surface);

  std::vector<double> mean(table.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& w : phrase_words) {
    auto it = table.index.find(w);
    if (it == table.index.end()) continue;
    for (std::size_t d = 0; d < table.dim; ++d) mean[d] += table.vectors[it->second][d];
    ++hits;
  }
  REQUIRE(hits > 0);
  double mean_norm = 0.0;
  for (double& v : mean) {
    v /= static_cast<double>(hits);
  }
  for (double v : mean) mean_norm += v * v;
  mean_norm = std::sqrt(mean_norm);

  std::string best;
  double best_cos = -2.0;
  for (std::size_t slot = 0; slot < table.words.size(); ++slot) {
    std::string key = table.words[slot];
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    if (std::find(phrase_words.begin(), phrase_words.end(), key) != phrase_words.end()) continue;
    double dot = 0.0;
    for (std::size_t d = 0; d < table.dim; ++d) dot += mean[d] * table.vectors[slot][d];
    const double cos = dot / mean_norm;
    if (cos > best_cos + 1e-15 ||
        (std::abs(cos - best_cos) <= 1e-15 && table.words[slot] < best)) {
      best_cos = cos;
      best = table.words[slot];
    }
  }
  return best;
}

}  // namespace

TEST_CASE("nearest_embedding_word picks the seeded neighbour") {
  text::LexicalResources res;
  res.add_embedding("colorado", {1.0, 0.0});
  res.add_embedding("river", {0.0, 1.0});
  res.add_embedding("sea", {0.7, 0.7});
  CHECK(text::nearest_embedding_word("Colorado River", res) == "sea");
}

TEST_CASE("nearest_embedding_word never returns a phrase word") {
  text::LexicalResources res;
  res.add_embedding("alpha", {1.0, 0.0});
  res.add_embedding("beta", {0.9, 0.1});
  CHECK(text::nearest_embedding_word("alpha", res) == "beta");
  CHECK_THROWS_AS(text::nearest_embedding_word("gamma", res), NoEmbedding);
}

TEST_CASE("nearest_embedding_word matches a brute-force scan") {
  rng::Stream stream(11);
  for (int trial = 0; trial < 20; ++trial) {
    text::LexicalResources res;
    const std::size_t dim = 4;
    for (int w = 0; w < 50; ++w) {
      std::vector<double> vec(dim);
      for (auto& v : vec) v = stream.next_real(-1.0, 1.0);
      double norm = 0.0;
      for (double v : vec) norm += v * v;
      if (norm < 1e-12) vec[0] = 1.0;
      res.add_embedding("w" + std::to_string(w), vec);
    }
    const std::string phrase =
        "w" + std::to_string(stream.next_index(50)) + " w" + std::to_string(stream.next_index(50));
    CHECK(text::nearest_embedding_word(phrase, res) == brute_force_nearest(phrase, res));
  }
}
