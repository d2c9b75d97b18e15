#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "eqakit/augment.hpp"
#include "statement_util.hpp"

namespace eqa::aug {

namespace {

// Splits "http://host:port/path" into client base and request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const std::size_t host_begin = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = url.find('/', host_begin);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

HttpBackend::HttpBackend(std::string url, const text::LexicalResources& resources)
    : url_(std::move(url)), fallback_(resources) {}

std::string HttpBackend::build_prompt(const std::string& question, const std::string& answer) {
  std::string prompt = "Given the question and its answer, write a statement:\n";
  prompt += "Example:\n";
  prompt += "Question: What is the capital of France?\n";
  prompt += "Answer: Paris\n";
  prompt += "Statement: Paris is the capital of France.\n";
  prompt += "Question: In 1969, which mission first landed humans on the moon?\n";
  prompt += "Answer: Apollo 11\n";
  prompt += "Statement: In 1969, Apollo 11 first landed humans on the moon.\n";
  prompt += "Question: " + question + "\n";
  prompt += "Answer: " + answer + "\n";
  prompt += "Statement:";
  return prompt;
}

StatementResult HttpBackend::generate(const std::string& question, const std::string& answer) {
  const auto [base, path] = split_url(url_);
  httplib::Client client(base);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(30, 0);

  httplib::Headers headers;
  if (const char* token = std::getenv("EQAKIT_API_TOKEN")) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const nlohmann::json body = {{"prompt", build_prompt(question, answer)}};
  const httplib::Result res = client.Post(path, headers, body.dump(), "application/json");

  if (res && res->status == 200) {
    try {
      const nlohmann::json doc = nlohmann::json::parse(res->body);
      if (doc.contains("text") && doc["text"].is_string()) {
        std::string statement = doc["text"].get<std::string>();
        // Trim surrounding whitespace the endpoint may add.
        const auto first = statement.find_first_not_of(" \t\r\n");
        const auto last = statement.find_last_not_of(" \t\r\n");
        statement = first == std::string::npos ? "" : statement.substr(first, last - first + 1);
        if (detail::find_answer_in_statement(statement, answer)) {
          return {statement, Provenance::kExternal, false};
        }
      }
    } catch (const nlohmann::json::exception&) {
      // fall through to the template
    }
  }

  StatementResult out = fallback_.generate(question, answer);
  out.fell_back = true;
  return out;
}

}  // namespace eqa::aug
