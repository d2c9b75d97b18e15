#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eqakit/augment.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/metrics.hpp"
#include "eqakit/utf8.hpp"
#include "fixtures.hpp"
#include "toy_corpus.hpp"

using namespace eqa;
using testsupport::canonical_resources;
using testsupport::genocide_example;

TEST_CASE("select_synthetic_answer: modal vote wins, ties go lexicographic") {
  const auto ex = genocide_example();
  std::vector<data::PredictionFile> files = {
      {{ex.id, "Resolution 46/3"}},
      {{ex.id, "Resolution 46/3"}},
      {{ex.id, "CPPCG"}},
  };
  const auto provider = aug::CandidateProvider::ensemble_vote(files);
  const auto answer = aug::select_synthetic_answer(ex, provider);
  REQUIRE(answer.has_value());
  CHECK(*answer == "Resolution 46/3");
}

TEST_CASE("select_synthetic_answer rejects candidates too close to the gold") {
  const auto ex = genocide_example();
  std::vector<data::PredictionFile> files = {
      {{ex.id, "the Convention on the Prevention and Punishment"}},
      {{ex.id, "Punishment of the Crime of Genocide"}},
  };
  const auto provider = aug::CandidateProvider::ensemble_vote(files);
  CHECK(!aug::select_synthetic_answer(ex, provider).has_value());
}

TEST_CASE("selected answers always clear the F1 constraint") {
  const auto ex = genocide_example();
  rng::Stream stream(3);
  const std::vector<std::string> pool = {
      "Resolution 46/3",
      "the Convention on the Prevention",
      "General Assembly",
      "Punishment of the Crime",
      "Lemkin",
      "the crime of genocide",
  };
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<data::PredictionFile> files;
    const std::size_t n = 1 + stream.next_index(6);
    for (std::size_t i = 0; i < n; ++i) {
      files.push_back({{ex.id, pool[stream.next_index(pool.size())]}});
    }
    const auto answer =
        aug::select_synthetic_answer(ex, aug::CandidateProvider::ensemble_vote(files));
    if (answer) {
      CHECK(metrics::f1(*answer, {ex.gold_answers[0].text}) < aug::kMaxSyntheticF1);
    }
  }
}

TEST_CASE("embedding-span provider proposes a non-overlapping context span") {
  auto res = canonical_resources();
  data::QAExample ex;
  ex.id = "span-1";
  ex.question = "What does the river border?";
  ex.context = "The colorado river runs south. The desert lies near arizona and nevada.";
  ex.gold_answers = {{"colorado river", 4}};
  ex.is_answerable = true;
  ex.validate();

  const auto provider = aug::CandidateProvider::embedding_span(&res, 2);
  const auto answer = aug::select_synthetic_answer(ex, provider);
  REQUIRE(answer.has_value());
  CHECK(metrics::f1(*answer, {"colorado river"}) < aug::kMaxSyntheticF1);
  // The span comes from the context, outside the gold range.
  CHECK(ex.context.find(*answer) != std::string::npos);
}

TEST_CASE("template backend reproduces the reference statement") {
  const auto res = canonical_resources();
  aug::TemplateBackend backend(res);
  const auto out = backend.generate(testsupport::kGenocideQuestion, testsupport::kSyntheticAnswer);
  CHECK(out.text == testsupport::kSyntheticStatement);
  CHECK(out.provenance == aug::Provenance::kTemplate);
  CHECK(!out.fell_back);
  CHECK(backend.generate("What is X?", "Y").text == "Y is X.");
}

TEST_CASE("http backend falls back when the response lacks the answer") {
  const auto res = canonical_resources();

  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/complete", [&hits](const httplib::Request& req, httplib::Response& resp) {
    ++hits;
    const auto body = nlohmann::json::parse(req.body);
    REQUIRE(body.contains("prompt"));
    if (hits == 1) {
      resp.set_content(R"({"text":"A statement with no answer in it."})", "application/json");
    } else {
      resp.set_content(R"({"text":"In 1948, Resolution 46/3 established genocide as a prosecutable act."})",
                       "application/json");
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread server_thread([&server]() { server.listen_after_bind(); });
  while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  aug::HttpBackend backend("http://127.0.0.1:" + std::to_string(port) + "/complete", res);

  const auto fallback = backend.generate(testsupport::kGenocideQuestion, "Resolution 46/3");
  CHECK(fallback.fell_back);
  CHECK(fallback.provenance == aug::Provenance::kTemplate);
  CHECK(fallback.text == testsupport::kSyntheticStatement);

  const auto external = backend.generate(testsupport::kGenocideQuestion, "Resolution 46/3");
  CHECK(!external.fell_back);
  CHECK(external.provenance == aug::Provenance::kExternal);
  CHECK(external.text == testsupport::kSyntheticStatement);

  server.stop();
  server_thread.join();
}

TEST_CASE("http backend falls back when no server answers") {
  const auto res = canonical_resources();
  aug::HttpBackend backend("http://127.0.0.1:9/complete", res);  // nothing listens there
  const auto out = backend.generate("What is X?", "Y");
  CHECK(out.fell_back);
  CHECK(out.text == "Y is X.");
}

TEST_CASE("insert_statement uses internal boundaries only") {
  rng::Stream stream(5);
  const std::string context = "First one. Second one. Third one.";
  const auto bounds = text::sentence_boundaries(context);
  REQUIRE(bounds.size() == 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto result = aug::insert_statement(context, "Inserted here.", stream);
    REQUIRE(result.has_value());
    CHECK((result->second == bounds[0] || result->second == bounds[1]));
    CHECK(result->first.find("Inserted here. ") != std::string::npos);
  }
  CHECK(!aug::insert_statement("Only one sentence.", "X.", stream).has_value());
}

TEST_CASE("augment_dataset hits its quota and leaves the rest untouched") {
  const auto corpus = testsupport::make_toy_corpus(11, 100, 50, 0, 0);
  const auto res = canonical_resources();

  // Vote provider: every answerable example gets a far-away candidate.
  data::PredictionFile votes;
  for (const auto& ex : corpus.train.examples) votes[ex.id] = "zeppelin cargo";
  const auto provider = aug::CandidateProvider::ensemble_vote({votes});
  aug::TemplateBackend backend(res);

  const auto result = aug::augment_dataset(corpus.train, 0.2, provider, backend, 7);
  CHECK(result.quota == 20);
  CHECK(result.augmented == 20);
  CHECK(result.records.size() == 20);

  std::size_t with_two = 0;
  for (std::size_t i = 0; i < result.dataset.examples.size(); ++i) {
    const auto& before = corpus.train.examples[i];
    const auto& after = result.dataset.examples[i];
    CHECK(after.id == before.id);
    if (!before.is_answerable) {
      CHECK(after.context == before.context);
      CHECK(!after.is_answerable);
      continue;
    }
    if (after.gold_answers.size() == 2) {
      ++with_two;
      CHECK_NOTHROW(after.validate());
      CHECK(metrics::f1(after.gold_answers[1].text, {after.gold_answers[0].text}) <
            aug::kMaxSyntheticF1);
    } else {
      CHECK(after.context == before.context);
    }
  }
  CHECK(with_two == 20);

  // Same seed, same result.
  const auto rerun = aug::augment_dataset(corpus.train, 0.2, provider, backend, 7);
  REQUIRE(rerun.records.size() == result.records.size());
  for (std::size_t i = 0; i < rerun.records.size(); ++i) {
    CHECK(rerun.records[i].id == result.records[i].id);
    CHECK(rerun.records[i].insert_offset == result.records[i].insert_offset);
  }
}

TEST_CASE("augment_dataset reports an unreachable quota") {
  const auto corpus = testsupport::make_toy_corpus(13, 10, 0, 0, 0);
  const auto res = canonical_resources();
  // Candidates equal the gold answer, so every draw fails the constraint.
  data::PredictionFile votes;
  for (const auto& ex : corpus.train.examples) votes[ex.id] = ex.gold_answers[0].text;
  const auto provider = aug::CandidateProvider::ensemble_vote({votes});
  aug::TemplateBackend backend(res);

  const auto result = aug::augment_dataset(corpus.train, 0.5, provider, backend, 3);
  CHECK(result.quota == 5);
  CHECK(result.augmented == 0);
  CHECK(result.skipped == 10);
}

TEST_CASE("strip_support_sentence restores the original gold set") {
  const auto res = canonical_resources();
  data::Dataset d;
  d.name = "probe";
  d.examples = {genocide_example()};

  std::vector<data::PredictionFile> files = {{{d.examples[0].id, "Resolution 46/3"}}};
  aug::TemplateBackend backend(res);
  const auto augmented =
      aug::augment_dataset(d, 1.0, aug::CandidateProvider::ensemble_vote(files), backend, 1);
  REQUIRE(augmented.augmented == 1);
  const auto& aug_ex = augmented.dataset.examples[0];
  REQUIRE(aug_ex.gold_answers.size() == 2);
  CHECK(aug_ex.context.find(testsupport::kSyntheticStatement) != std::string::npos);

  const auto stripped = aug::strip_support_sentence(augmented.dataset, augmented.records);
  const auto& out = stripped.examples[0];
  REQUIRE(out.gold_answers.size() == 1);
  CHECK(out.gold_answers[0].text == testsupport::kGenocideGold);
  CHECK_NOTHROW(out.validate());
  // The bare synthetic answer remains in the context, unsupported.
  CHECK(out.context.find("Resolution 46/3") != std::string::npos);
  CHECK(out.context.find(testsupport::kSyntheticStatement) == std::string::npos);
}

TEST_CASE("strip_support_sentence passes non-augmented examples through") {
  data::Dataset d;
  d.name = "mixed";
  d.examples = {genocide_example()};
  const auto out = aug::strip_support_sentence(d, {});
  CHECK(out.examples[0].context == d.examples[0].context);
}

TEST_CASE("strip_support_sentence rejects stale records") {
  data::Dataset d;
  d.name = "stale";
  d.examples = {genocide_example()};
  aug::SyntheticRecord bogus;
  bogus.id = d.examples[0].id;
  bogus.synthetic_answer = "Resolution 46/3";
  bogus.statement = "A statement that was never inserted.";
  bogus.insert_offset = 0;
  CHECK_THROWS_AS(aug::strip_support_sentence(d, {bogus}), RecordMismatch);

  aug::SyntheticRecord unknown = bogus;
  unknown.id = "missing-id";
  CHECK_THROWS_AS(aug::strip_support_sentence(d, {unknown}), RecordMismatch);
}

TEST_CASE("augment then strip restores every original gold text") {
  const auto corpus = testsupport::make_toy_corpus(17, 40, 10, 0, 0);
  const auto res = canonical_resources();
  data::PredictionFile votes;
  for (const auto& ex : corpus.train.examples) votes[ex.id] = "zeppelin cargo";
  aug::TemplateBackend backend(res);
  const auto augmented = aug::augment_dataset(
      corpus.train, 0.5, aug::CandidateProvider::ensemble_vote({votes}), backend, 23);
  const auto stripped = aug::strip_support_sentence(augmented.dataset, augmented.records);

  REQUIRE(stripped.examples.size() == corpus.train.examples.size());
  for (std::size_t i = 0; i < stripped.examples.size(); ++i) {
    const auto& original = corpus.train.examples[i];
    const auto& restored = stripped.examples[i];
    REQUIRE(restored.gold_answers.size() == original.gold_answers.size());
    for (std::size_t g = 0; g < restored.gold_answers.size(); ++g) {
      CHECK(restored.gold_answers[g].text == original.gold_answers[g].text);
    }
    CHECK_NOTHROW(restored.validate());
  }
}
