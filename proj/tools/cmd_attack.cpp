#include <fstream>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/attacks.hpp"

namespace eqa::cli {

namespace {

struct AttackArgs {
  std::string kind = "aos";
  std::string in_path;
  std::string out_path;
  std::string manifest_path;
  std::string resources_dir;
  std::string placement = "random";
  std::uint64_t seed = 0;
};

void run(const AttackArgs& args) {
  require_distinct_paths(args.in_path, args.out_path);
  require_distinct_paths(args.in_path, args.manifest_path);

  const data::Dataset input = data::load_dataset(args.in_path);
  const text::LexicalResources resources = text::load_resources_dir(args.resources_dir);
  const attack::Kind kind =
      args.kind == "aos" ? attack::Kind::kAddOneSent : attack::Kind::kNegation;
  const attack::Placement placement =
      args.placement == "end" ? attack::Placement::kEnd : attack::Placement::kRandom;

  const attack::RunResult result =
      attack::attack_dataset(input, kind, resources, args.seed, placement);
  data::save_dataset(result.attacked, args.out_path);

  if (!args.manifest_path.empty()) {
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const attack::ManifestEntry& e : result.manifest) {
      nlohmann::ordered_json entry{{"id", e.id}, {"attacked", e.attacked}};
      if (e.attacked) {
        entry["sentence"] = e.sentence;
        entry["insert_offset"] = e.insert_offset;
      } else {
        entry["reason"] = e.reason;
      }
      entries.push_back(std::move(entry));
    }
    const nlohmann::ordered_json manifest{
        {"attack", attack::kind_name(kind)}, {"seed", args.seed},
        {"placement", args.placement},      {"skipped", result.skipped},
        {"entries", std::move(entries)},
    };
    std::ofstream out(args.manifest_path);
    if (!out) throw IoFailure("cannot write manifest: " + args.manifest_path);
    out << manifest.dump(2) << '\n';
  }

  std::cout << "attacked " << result.attacked.examples.size() << " examples ("
            << result.skipped << " skipped) -> " << args.out_path << std::endl;
}

}  // namespace

void register_attack(CLI::App& app) {
  auto args = std::make_shared<AttackArgs>();
  CLI::App* cmd =
      app.add_subcommand("attack", "Generate adversarial variants of answerable examples");
  cmd->add_option("--attack", args->kind, "attack type")
      ->check(CLI::IsMember({"aos", "negation"}))
      ->capture_default_str();
  cmd->add_option("--in", args->in_path, "input dataset (SQuAD v2 JSON)")->required();
  cmd->add_option("--out", args->out_path, "attacked dataset output")->required();
  cmd->add_option("--manifest", args->manifest_path, "per-example attack metadata JSON");
  cmd->add_option("--resources", args->resources_dir,
                  "directory with antonyms.tsv / pos.tsv / embeddings.txt")
      ->required();
  cmd->add_option("--placement", args->placement, "insertion point choice")
      ->check(CLI::IsMember({"random", "end"}))
      ->capture_default_str();
  cmd->add_option("--seed", args->seed)->capture_default_str();
  cmd->callback([args]() { run(*args); });
}

}  // namespace eqa::cli
