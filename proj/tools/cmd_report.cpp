#include <fstream>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/metrics.hpp"

namespace eqa::cli {

namespace {

struct ReportArgs {
  std::string domains_path;
  std::string attacked_path;
  std::string out_path;
};

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open file: " + path);
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedFile("invalid JSON in " + path + ": " + e.what());
  }
}

void run(const ReportArgs& args) {
  const nlohmann::json doc = parse_file(args.domains_path);
  if (!doc.contains("domains") || !doc["domains"].is_array()) {
    throw MalformedFile("expected a top-level 'domains' array in " + args.domains_path);
  }
  std::vector<metrics::DomainResult> domains;
  for (const auto& entry : doc["domains"]) {
    if (!entry.contains("name") || !entry.contains("category") || !entry.contains("f1")) {
      throw MalformedFile("each domain needs name/category/f1 in " + args.domains_path);
    }
    const std::string category = entry["category"].get<std::string>();
    if (category != "has_ans" && category != "no_ans") {
      throw MalformedFile("category must be has_ans or no_ans, got '" + category + "'");
    }
    domains.push_back({entry["name"].get<std::string>(),
                       category == "has_ans" ? metrics::Category::kHasAns
                                             : metrics::Category::kNoAns,
                       entry["f1"].get<double>()});
  }

  metrics::EvalReport report = metrics::aggregate(domains);

  if (!args.attacked_path.empty()) {
    const nlohmann::json attacked_doc = parse_file(args.attacked_path);
    if (!attacked_doc.contains("original") || !attacked_doc.contains("attacked") ||
        !attacked_doc["attacked"].is_array()) {
      throw MalformedFile("expected 'original' and an 'attacked' array in " +
                          args.attacked_path);
    }
    std::vector<std::pair<std::string, double>> attacked;
    for (const auto& entry : attacked_doc["attacked"]) {
      attacked.emplace_back(entry["name"].get<std::string>(), entry["f1"].get<double>());
    }
    const auto [deltas, mean] =
        metrics::robustness_delta(attacked_doc["original"].get<double>(), attacked);
    report.attack_deltas = deltas;
    report.mean_delta = mean;
    report.has_deltas = true;
  }

  std::cout << report.to_table();
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw IoFailure("cannot write report: " + args.out_path);
    out << report.to_json() << '\n';
  }
}

}  // namespace

void register_report(CLI::App& app) {
  auto args = std::make_shared<ReportArgs>();
  CLI::App* cmd = app.add_subcommand(
      "report", "Aggregate per-domain scores into has-ans/no-ans/overall and deltas");
  cmd->add_option("--domains", args->domains_path, "per-domain results JSON")->required();
  cmd->add_option("--attacked", args->attacked_path,
                  "original + attacked scores JSON for robustness deltas");
  cmd->add_option("--out", args->out_path, "machine-readable report output");
  cmd->callback([args]() { run(*args); });
}

void require_distinct_paths(const std::string& input, const std::string& output) {
  if (!output.empty() && input == output) {
    throw UsageError("refusing to overwrite input file: " + input);
  }
}

}  // namespace eqa::cli
