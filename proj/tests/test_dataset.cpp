#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "eqakit/dataset.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/rng.hpp"
#include "eqakit/utf8.hpp"
#include "fixtures.hpp"

using namespace eqa;

namespace {

// Unique temp path; removed by the caller.
std::string temp_path(const std::string& tag) {
  static int counter = 0;
  return (std::filesystem::temp_directory_path() /
          ("eqakit-test-" + tag + "-" + std::to_string(++counter) + ".json"))
      .string();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& tag) : path(temp_path(tag)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

bool examples_equal(const data::QAExample& a, const data::QAExample& b) {
  return a.id == b.id && a.question == b.question && a.context == b.context &&
         a.gold_answers == b.gold_answers && a.is_answerable == b.is_answerable;
}

}  // namespace

TEST_CASE("load_dataset reads an answerable entry") {
  TempFile f("load");
  const auto ex = testsupport::desert_example();
  write_text(f.path, R"({"version":"v2.0","data":[{"title":"t","paragraphs":[{"context":)" +
                         nlohmann::json(ex.context).dump() + R"(,"qas":[{"id":"q1","question":)" +
                         nlohmann::json(ex.question).dump() +
                         R"(,"is_impossible":false,"answers":[{"text":"Colorado River","answer_start":)" +
                         std::to_string(ex.gold_answers[0].start) + R"(}]}]}]}]})");

  const auto d = data::load_dataset(f.path);
  REQUIRE(d.examples.size() == 1);
  CHECK(d.examples[0].is_answerable);
  CHECK(d.examples[0].gold_answers[0].text == "Colorado River");
}

TEST_CASE("load_dataset maps is_impossible to no answers") {
  TempFile f("imp");
  write_text(f.path,
             R"({"data":[{"paragraphs":[{"context":"Nothing here.","qas":[
                 {"id":"q1","question":"What?","is_impossible":true,"answers":[]}]}]}]})");
  const auto d = data::load_dataset(f.path);
  REQUIRE(d.examples.size() == 1);
  CHECK(!d.examples[0].is_answerable);
  CHECK(d.examples[0].gold_answers.empty());
}

TEST_CASE("load_dataset rejects a wrong answer offset") {
  TempFile f("offset");
  write_text(f.path,
             R"({"data":[{"paragraphs":[{"context":"The Colorado River flows.","qas":[
                 {"id":"bad-1","question":"What?","answers":[{"text":"Colorado River","answer_start":0}]}]}]}]})");
  CHECK_THROWS_WITH_AS(data::load_dataset(f.path), doctest::Contains("bad-1"), OffsetMismatch);
}

TEST_CASE("load_dataset rejects malformed JSON and schemas") {
  TempFile f("bad");
  SUBCASE("not JSON") {
    write_text(f.path, "this is not json");
    CHECK_THROWS_AS(data::load_dataset(f.path), MalformedFile);
  }
  SUBCASE("missing data array") {
    write_text(f.path, R"({"foo": 1})");
    CHECK_THROWS_AS(data::load_dataset(f.path), MalformedFile);
  }
  SUBCASE("answerable without answers") {
    write_text(f.path,
               R"({"data":[{"paragraphs":[{"context":"x","qas":[
                   {"id":"q","question":"?","is_impossible":false,"answers":[]}]}]}]})");
    CHECK_THROWS_AS(data::load_dataset(f.path), MalformedFile);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(data::load_dataset("/nonexistent/nowhere.json"), IoFailure);
  }
}

TEST_CASE("save then load is the identity on datasets") {
  SUBCASE("empty dataset") {
    TempFile f("empty");
    data::Dataset d;
    d.name = "empty-set";
    data::save_dataset(d, f.path);
    const auto back = data::load_dataset(f.path);
    CHECK(back.name == "empty-set");
    CHECK(back.examples.empty());
  }

  SUBCASE("single example") {
    TempFile f("single");
    data::Dataset d;
    d.name = "one";
    d.examples = {testsupport::desert_example()};
    data::save_dataset(d, f.path);
    const auto back = data::load_dataset(f.path);
    REQUIRE(back.examples.size() == 1);
    CHECK(examples_equal(back.examples[0], d.examples[0]));
  }

  SUBCASE("two answers per question survive the round trip") {
    TempFile f("multi");
    data::Dataset d;
    d.name = "multi";
    data::QAExample ex;
    ex.id = "m1";
    ex.question = "What is kept?";
    ex.context = "Alice keeps the apple. Bob keeps the pear.";
    ex.gold_answers = {{"apple", 16}, {"pear", 37}};
    ex.is_answerable = true;
    ex.validate();
    d.examples = {ex};
    data::save_dataset(d, f.path);
    const auto back = data::load_dataset(f.path);
    REQUIRE(back.examples.size() == 1);
    REQUIRE(back.examples[0].gold_answers.size() == 2);
    CHECK(examples_equal(back.examples[0], ex));
  }
}

TEST_CASE("dataset round trip holds on generated datasets") {
  rng::Stream stream(23);
  const std::vector<std::string> words = {"alpha", "beta",  "gamma", "delta",
                                          "café", "río", "zeta",  "omega"};
  for (int trial = 0; trial < 20; ++trial) {
    data::Dataset d;
    d.name = "gen-" + std::to_string(trial);
    const std::size_t count = stream.next_index(6);
    for (std::size_t i = 0; i < count; ++i) {
      data::QAExample ex;
      ex.id = "g" + std::to_string(trial) + "-" + std::to_string(i);

      std::vector<std::string> ctx_words;
      const std::size_t n_words = 3 + stream.next_index(8);
      for (std::size_t w = 0; w < n_words; ++w) {
        ctx_words.push_back(words[stream.next_index(words.size())]);
      }
      std::size_t answer_word = stream.next_index(ctx_words.size());
      std::size_t offset = 0;
      for (std::size_t w = 0; w < answer_word; ++w) {
        offset += eqa::utf8::length(ctx_words[w]) + 1;
      }
      for (std::size_t w = 0; w < ctx_words.size(); ++w) {
        if (w) ex.context += " ";
        ex.context += ctx_words[w];
      }
      ex.question = "Which word?";
      if (stream.next_unit() < 0.7) {
        ex.gold_answers = {{ctx_words[answer_word], offset}};
        ex.is_answerable = true;
      }
      ex.validate();
      d.examples.push_back(std::move(ex));
    }

    TempFile f("prop");
    data::save_dataset(d, f.path);
    const auto back = data::load_dataset(f.path);
    REQUIRE(back.examples.size() == d.examples.size());
    CHECK(back.name == d.name);
    for (std::size_t i = 0; i < d.examples.size(); ++i) {
      CHECK(examples_equal(back.examples[i], d.examples[i]));
    }
  }
}

TEST_CASE("prediction files round trip") {
  SUBCASE("empty answer") {
    TempFile f("pred1");
    data::PredictionFile p{{"q1", ""}};
    data::save_predictions(p, f.path);
    CHECK(data::load_predictions(f.path) == p);
  }
  SUBCASE("plain answer") {
    TempFile f("pred2");
    data::PredictionFile p{{"q1", "Colorado River"}};
    data::save_predictions(p, f.path);
    CHECK(data::load_predictions(f.path) == p);
  }
  SUBCASE("large map, order independent") {
    TempFile f("pred3");
    data::PredictionFile p;
    for (int i = 0; i < 1000; ++i) p["id-" + std::to_string(i)] = "answer " + std::to_string(i);
    data::save_predictions(p, f.path);
    CHECK(data::load_predictions(f.path) == p);
  }
}

TEST_CASE("validate_predictions flags unknown ids") {
  data::Dataset d;
  d.name = "v";
  d.examples = {testsupport::desert_example()};
  data::PredictionFile good{{d.examples[0].id, "x"}};
  CHECK_NOTHROW(data::validate_predictions(good, d));
  data::PredictionFile bad{{"mystery", "x"}};
  CHECK_THROWS_AS(data::validate_predictions(bad, d), MalformedFile);
}
