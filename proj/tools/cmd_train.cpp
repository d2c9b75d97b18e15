#include <filesystem>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "eqakit/training.hpp"

namespace eqa::cli {

namespace {

struct TrainArgs {
  std::string train_path;
  std::vector<std::string> eval_specs;  // name=path
  std::string scheme = "ours";
  std::string preset;
  double lambda_qa = 2.0;
  double lambda_tag = 1.0;
  std::size_t batch_size = 8;
  std::size_t epochs = 3;
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  double clip_norm = 1.0;
  std::size_t max_len = 384;
  std::size_t embed_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t ffn_dim = 128;
  std::size_t max_answer_len = 30;
  std::uint64_t seed = 0;
  std::string save_path;
  std::string log_path;
};

std::pair<std::string, std::string> split_named_path(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw UsageError("expected name=path, got '" + spec + "'");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

void run(const TrainArgs& args, const CLI::App* cmd) {
  train::TrainConfig cfg;
  if (!args.preset.empty()) {
    if (args.preset == "paper-appendix-c") {
      cfg = train::TrainConfig::paper_appendix_preset();
    } else if (args.preset == "toy") {
      cfg = train::TrainConfig{};
    } else {
      throw UsageError("unknown preset '" + args.preset + "'");
    }
  }
  cfg.loss = args.scheme == "ours" ? loss::LossSpec::Ours(args.lambda_qa, args.lambda_tag)
                                   : loss::LossSpec::Default();
  cfg.batch_size = args.batch_size;
  cfg.epochs = args.epochs;
  // An explicit --lr beats the preset; otherwise the preset's rate stands.
  if (args.preset.empty() || cmd->count("--lr") > 0) cfg.learning_rate = args.learning_rate;
  cfg.weight_decay = args.weight_decay;
  cfg.clip_norm = args.clip_norm;
  cfg.seed = args.seed;
  cfg.max_answer_len = args.max_answer_len;
  cfg.model.max_len = args.max_len;
  cfg.model.embed_dim = args.embed_dim;
  cfg.model.num_layers = args.num_layers;
  cfg.model.num_heads = args.num_heads;
  cfg.model.ffn_dim = args.ffn_dim;
  cfg.model.seed = args.seed;

  require_distinct_paths(args.train_path, args.save_path);
  require_distinct_paths(args.train_path, args.log_path);

  const data::Dataset train_set = data::load_dataset(args.train_path);

  std::vector<std::pair<std::string, data::Dataset>> eval_data;
  for (const std::string& spec : args.eval_specs) {
    auto [name, path] = split_named_path(spec);
    eval_data.emplace_back(name, data::load_dataset(path));
  }

  std::vector<const data::Dataset*> vocab_sources = {&train_set};
  for (const auto& [_, d] : eval_data) vocab_sources.push_back(&d);
  const text::Vocabulary vocab = text::Vocabulary::build(vocab_sources);
  cfg.model.vocab_size = vocab.size();

  std::vector<train::EvalSet> eval_sets;
  for (const auto& [name, d] : eval_data) eval_sets.push_back({name, &d});

  std::cerr << "training on " << train_set.examples.size() << " examples, vocab "
            << vocab.size() << ", scheme " << args.scheme << ", " << cfg.epochs
            << " epochs" << std::endl;
  const auto [params, log] = train::train(cfg, train_set, vocab, eval_sets);

  for (const auto& epoch : log.epochs) {
    std::cerr << "epoch " << epoch.epoch;
    for (const auto& eval : epoch.evals) std::cerr << "  " << eval.name << "=" << eval.f1;
    if (epoch.gap) std::cerr << "  gap=" << *epoch.gap;
    std::cerr << std::endl;
  }

  if (!args.save_path.empty()) {
    train::save_checkpoint(params, cfg, vocab, args.save_path);
    std::cout << "checkpoint written to " << args.save_path << std::endl;
  }
  if (!args.log_path.empty()) {
    log.save_jsonl(args.log_path);
    std::cout << "training log written to " << args.log_path << std::endl;
  }
}

}  // namespace

void register_train(CLI::App& app) {
  auto args = std::make_shared<TrainArgs>();
  CLI::App* cmd = app.add_subcommand("train", "Train an encoder on a SQuAD-format dataset");
  cmd->add_option("--train", args->train_path, "training dataset (SQuAD v2 JSON)")
      ->required();
  cmd->add_option("--eval", args->eval_specs,
                  "eval dataset as name=path; repeatable, scored every epoch")
      ->take_all();
  cmd->add_option("--scheme", args->scheme, "loss scheme")
      ->check(CLI::IsMember({"default", "ours"}))
      ->capture_default_str();
  cmd->add_option("--preset", args->preset, "hyperparameter preset: toy, paper-appendix-c");
  cmd->add_option("--lambda-qa", args->lambda_qa, "span loss weight")->capture_default_str();
  cmd->add_option("--lambda-tag", args->lambda_tag, "tagging loss weight")
      ->capture_default_str();
  cmd->add_option("--batch-size", args->batch_size)->capture_default_str();
  cmd->add_option("--epochs", args->epochs)->capture_default_str();
  cmd->add_option("--lr", args->learning_rate, "learning rate")->capture_default_str();
  cmd->add_option("--weight-decay", args->weight_decay)->capture_default_str();
  cmd->add_option("--clip-norm", args->clip_norm, "global gradient norm cap (0 = off)")
      ->capture_default_str();
  cmd->add_option("--max-len", args->max_len, "sequence length")->capture_default_str();
  cmd->add_option("--embed-dim", args->embed_dim)->capture_default_str();
  cmd->add_option("--layers", args->num_layers)->capture_default_str();
  cmd->add_option("--heads", args->num_heads)->capture_default_str();
  cmd->add_option("--ffn-dim", args->ffn_dim)->capture_default_str();
  cmd->add_option("--max-answer-len", args->max_answer_len)->capture_default_str();
  cmd->add_option("--seed", args->seed, "seed for init and shuffling")->capture_default_str();
  cmd->add_option("--save", args->save_path, "checkpoint output path");
  cmd->add_option("--log", args->log_path, "JSONL training log output path");
  cmd->callback([args, cmd]() { run(*args, cmd); });
}

}  // namespace eqa::cli
