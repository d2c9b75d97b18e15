#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/augment.hpp"

namespace eqa::cli {

namespace {

struct AugmentArgs {
  std::string in_path;
  std::string out_path;
  std::string records_path;
  std::string resources_dir;
  std::string provider = "embed";
  std::string backend = "template";
  double fraction = 0.2;
  std::uint64_t seed = 0;
};

aug::CandidateProvider make_provider(const std::string& spec,
                                     const text::LexicalResources& resources) {
  if (spec == "embed") {
    return aug::CandidateProvider::embedding_span(&resources);
  }
  if (spec.rfind("vote:", 0) == 0) {
    std::vector<data::PredictionFile> files;
    std::stringstream ss(spec.substr(5));
    std::string path;
    while (std::getline(ss, path, ',')) {
      if (!path.empty()) files.push_back(data::load_predictions(path));
    }
    if (files.empty()) {
      throw UsageError("vote provider needs at least one prediction file: " + spec);
    }
    return aug::CandidateProvider::ensemble_vote(std::move(files));
  }
  throw UsageError("unknown provider '" + spec + "'; use embed or vote:<files,...>");
}

std::unique_ptr<aug::StatementBackend> make_backend(const std::string& spec,
                                                    const text::LexicalResources& resources) {
  if (spec == "template") {
    return std::make_unique<aug::TemplateBackend>(resources);
  }
  if (spec.rfind("http", 0) == 0) {
    // Accept both http:<url> and a bare URL.
    std::string url = spec;
    if (spec.rfind("http:http", 0) == 0) url = spec.substr(5);
    return std::make_unique<aug::HttpBackend>(url, resources);
  }
  throw UsageError("unknown backend '" + spec + "'; use template or http:<url>");
}

void run(const AugmentArgs& args) {
  require_distinct_paths(args.in_path, args.out_path);
  require_distinct_paths(args.in_path, args.records_path);

  const data::Dataset input = data::load_dataset(args.in_path);
  const text::LexicalResources resources = text::load_resources_dir(args.resources_dir);
  const aug::CandidateProvider provider = make_provider(args.provider, resources);
  const auto backend = make_backend(args.backend, resources);

  const aug::AugmentResult result =
      aug::augment_dataset(input, args.fraction, provider, *backend, args.seed);
  data::save_dataset(result.dataset, args.out_path);

  if (!args.records_path.empty()) {
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (const aug::SyntheticRecord& r : result.records) {
      records.push_back({
          {"id", r.id},
          {"synthetic_answer", r.synthetic_answer},
          {"statement", r.statement},
          {"insert_offset", r.insert_offset},
          {"provenance", r.provenance == aug::Provenance::kTemplate ? "template" : "external"},
          {"backend_fell_back", r.backend_fell_back},
      });
    }
    const nlohmann::ordered_json doc{
        {"fraction", args.fraction}, {"seed", args.seed},
        {"quota", result.quota},     {"augmented", result.augmented},
        {"skipped", result.skipped}, {"records", std::move(records)},
    };
    std::ofstream out(args.records_path);
    if (!out) throw IoFailure("cannot write records: " + args.records_path);
    out << doc.dump(2) << '\n';
  }

  std::cout << "augmented " << result.augmented << "/" << result.quota << " examples ("
            << result.skipped << " draws skipped) -> " << args.out_path << std::endl;
  if (result.augmented < result.quota) {
    std::cerr << "warning: candidate pool exhausted before the quota was met" << std::endl;
  }
}

}  // namespace

void register_augment(CLI::App& app) {
  auto args = std::make_shared<AugmentArgs>();
  CLI::App* cmd = app.add_subcommand(
      "augment", "Add a synthetic second answer to a fraction of answerable examples");
  cmd->add_option("--in", args->in_path, "input dataset (SQuAD v2 JSON)")->required();
  cmd->add_option("--out", args->out_path, "augmented dataset output")->required();
  cmd->add_option("--records", args->records_path, "synthetic-answer records JSON");
  cmd->add_option("--resources", args->resources_dir,
                  "directory with antonyms.tsv / pos.tsv / embeddings.txt")
      ->required();
  cmd->add_option("--fraction", args->fraction, "fraction of answerable examples to augment")
      ->capture_default_str();
  cmd->add_option("--provider", args->provider,
                  "candidate source: embed or vote:<prediction files,...>")
      ->capture_default_str();
  cmd->add_option("--backend", args->backend, "statement generator: template or http:<url>")
      ->capture_default_str();
  cmd->add_option("--seed", args->seed)->capture_default_str();
  cmd->callback([args]() { run(*args); });
}

}  // namespace eqa::cli
