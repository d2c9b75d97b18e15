#include "eqakit/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "eqakit/errors.hpp"
#include "eqakit/utf8.hpp"

namespace eqa::data {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw MalformedFile("invalid JSON in " + path + ": " + e.what());
  }
  return doc;
}

void write_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open file for writing: " + path);
  out << doc.dump(1, '\t') << '\n';
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace

void QAExample::validate() const {
  if (is_answerable != !gold_answers.empty()) {
    throw MalformedFile("example " + id +
                        ": is_answerable flag disagrees with the answer list");
  }
  const std::u32string ctx = utf8::decode(context);
  for (const AnswerRef& ans : gold_answers) {
    const std::u32string text = utf8::decode(ans.text);
    const std::u32string found = utf8::slice(ctx, ans.start, ans.start + text.size());
    if (found != text) {
      throw OffsetMismatch(id, "example " + id + ": answer '" + ans.text +
                                   "' not found at offset " + std::to_string(ans.start));
    }
  }
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const QAExample& ex : examples) {
    ex.validate();
    if (!ids.insert(ex.id).second) {
      throw MalformedFile("duplicate example id: " + ex.id);
    }
  }
}

Dataset load_dataset(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object() || !doc.contains("data") || !doc["data"].is_array()) {
    throw MalformedFile("missing top-level 'data' array in " + path);
  }

  Dataset d;
  if (doc.contains("name") && doc["name"].is_string()) {
    d.name = doc["name"].get<std::string>();
  } else {
    d.name = std::filesystem::path(path).stem().string();
  }

  for (const json& article : doc["data"]) {
    if (!article.is_object() || !article.contains("paragraphs") ||
        !article["paragraphs"].is_array()) {
      throw MalformedFile("article without 'paragraphs' array in " + path);
    }
    for (const json& para : article["paragraphs"]) {
      if (!para.is_object() || !para.contains("context") || !para.contains("qas") ||
          !para["qas"].is_array()) {
        throw MalformedFile("paragraph without context/qas in " + path);
      }
      const std::string context = para["context"].get<std::string>();
      for (const json& qa : para["qas"]) {
        if (!qa.is_object() || !qa.contains("id") || !qa.contains("question")) {
          throw MalformedFile("qa entry without id/question in " + path);
        }
        QAExample ex;
        ex.id = qa["id"].get<std::string>();
        ex.question = qa["question"].get<std::string>();
        ex.context = context;

        const bool impossible = qa.value("is_impossible", false);
        if (!impossible) {
          if (!qa.contains("answers") || !qa["answers"].is_array() || qa["answers"].empty()) {
            throw MalformedFile("answerable qa " + ex.id + " has no answers in " + path);
          }
          for (const json& ans : qa["answers"]) {
            if (!ans.contains("text") || !ans.contains("answer_start")) {
              throw MalformedFile("answer without text/answer_start for qa " + ex.id);
            }
            ex.gold_answers.push_back(AnswerRef{
                ans["text"].get<std::string>(),
                static_cast<std::size_t>(ans["answer_start"].get<long long>())});
          }
        }
        // plausible_answers, when present, are intentionally not read.
        ex.is_answerable = !ex.gold_answers.empty();
        ex.validate();
        d.examples.push_back(std::move(ex));
      }
    }
  }
  d.validate();
  return d;
}

void save_dataset(const Dataset& d, const std::string& path) {
  json data = json::array();
  for (const QAExample& ex : d.examples) {
    json answers = json::array();
    for (const AnswerRef& ans : ex.gold_answers) {
      answers.push_back({{"text", ans.text}, {"answer_start", ans.start}});
    }
    json qa = {{"id", ex.id},
               {"question", ex.question},
               {"is_impossible", !ex.is_answerable},
               {"answers", std::move(answers)}};
    json para = {{"context", ex.context}, {"qas", json::array({std::move(qa)})}};
    data.push_back({{"title", d.name}, {"paragraphs", json::array({std::move(para)})}});
  }
  write_file(path, json{{"version", "v2.0"}, {"name", d.name}, {"data", std::move(data)}});
}

PredictionFile load_predictions(const std::string& path) {
  const json doc = parse_file(path);
  if (!doc.is_object()) throw MalformedFile("prediction file must be a JSON object: " + path);
  PredictionFile p;
  for (const auto& [id, value] : doc.items()) {
    if (!value.is_string()) {
      throw MalformedFile("prediction for '" + id + "' is not a string in " + path);
    }
    p[id] = value.get<std::string>();
  }
  return p;
}

void save_predictions(const PredictionFile& p, const std::string& path) {
  json doc = json::object();
  for (const auto& [id, text] : p) doc[id] = text;
  write_file(path, doc);
}

void validate_predictions(const PredictionFile& p, const Dataset& d) {
  std::set<std::string> ids;
  for (const QAExample& ex : d.examples) ids.insert(ex.id);
  for (const auto& [id, _] : p) {
    if (!ids.count(id)) {
      throw MalformedFile("prediction for unknown example id: " + id);
    }
  }
}

}  // namespace eqa::data
