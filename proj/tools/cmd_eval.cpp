#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/training.hpp"

namespace eqa::cli {

namespace {

struct EvalArgs {
  std::string checkpoint_path;
  std::vector<std::string> data_specs;  // name=path
  std::string mode;                     // empty = follow the checkpoint scheme
  std::string out_dir;
  std::string report_path;
  std::size_t max_answer_len = 0;  // 0 = use the checkpoint's setting
};

void run(const EvalArgs& args) {
  const train::Checkpoint ckpt = train::load_checkpoint(args.checkpoint_path);

  infer::Mode mode = ckpt.config.inference_mode();
  if (!args.mode.empty()) {
    const infer::Mode requested =
        args.mode == "ours" ? infer::Mode::kNegativeMax : infer::Mode::kClsSpan;
    if (requested != mode) {
      throw UsageError("checkpoint was trained with the " +
                       std::string(ckpt.config.loss.scheme == loss::Scheme::kOurs
                                       ? "ours"
                                       : "default") +
                       " scheme; cross-mode evaluation is not supported");
    }
  }
  const std::size_t max_answer_len =
      args.max_answer_len > 0 ? args.max_answer_len : ckpt.config.max_answer_len;

  std::vector<metrics::DomainResult> domains;
  for (const std::string& spec : args.data_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw UsageError("expected name=path, got '" + spec + "'");
    }
    const std::string name = spec.substr(0, eq);
    const std::string path = spec.substr(eq + 1);

    const data::Dataset dataset = data::load_dataset(path);
    auto [predictions, result] =
        train::evaluate(ckpt.params, dataset, mode, ckpt.vocab, max_answer_len);
    result.domain = name;
    domains.push_back(result);
    std::cout << name << "  "
              << (result.category == metrics::Category::kHasAns ? "has-ans" : "no-ans")
              << "  f1=" << result.f1 << std::endl;

    if (!args.out_dir.empty()) {
      std::filesystem::create_directories(args.out_dir);
      const std::string out =
          (std::filesystem::path(args.out_dir) / (name + ".predictions.json")).string();
      data::save_predictions(predictions, out);
    }
  }

  bool has = false, no = false;
  for (const auto& d : domains) {
    has = has || d.category == metrics::Category::kHasAns;
    no = no || d.category == metrics::Category::kNoAns;
  }
  if (has && no) {
    const metrics::EvalReport report = metrics::aggregate(domains);
    std::cout << report.to_table();
    if (!args.report_path.empty()) {
      std::ofstream out(args.report_path);
      if (!out) throw IoFailure("cannot write report: " + args.report_path);
      out << report.to_json() << '\n';
    }
  } else if (!args.report_path.empty()) {
    throw UsageError("--report needs at least one has-ans and one no-ans dataset");
  }
}

}  // namespace

void register_eval(CLI::App& app) {
  auto args = std::make_shared<EvalArgs>();
  CLI::App* cmd = app.add_subcommand("eval", "Evaluate a checkpoint on one or more datasets");
  cmd->add_option("--checkpoint", args->checkpoint_path, "checkpoint file")->required();
  cmd->add_option("--data", args->data_specs, "dataset as name=path; repeatable")
      ->required()
      ->take_all();
  cmd->add_option("--mode", args->mode, "inference rule (must match the training scheme)")
      ->check(CLI::IsMember({"default", "ours"}));
  cmd->add_option("--out-dir", args->out_dir, "directory for per-dataset prediction files");
  cmd->add_option("--report", args->report_path, "aggregate report JSON output");
  cmd->add_option("--max-answer-len", args->max_answer_len,
                  "span length cap (default: checkpoint setting)");
  cmd->callback([args]() { run(*args); });
}

}  // namespace eqa::cli
