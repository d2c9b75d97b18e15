#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eqakit/dataset.hpp"
#include "eqakit/encoder.hpp"
#include "eqakit/inference.hpp"
#include "eqakit/losses.hpp"
#include "eqakit/metrics.hpp"

namespace eqa::train {

// Decoupled-weight-decay Adam over shuffled mini-batches. The toy
// learning rate is the default; full-scale presets select 2e-5.
struct TrainConfig {
  nn::ModelConfig model;
  loss::LossSpec loss;
  std::size_t batch_size = 8;
  std::size_t epochs = 3;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.01;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;  // global gradient norm; 0 disables clipping
  std::uint64_t seed = 0;
  std::size_t max_answer_len = infer::kDefaultMaxAnswerLen;

  void validate() const;  // throws InvalidConfig / WeightRatioViolation

  // The hyperparameters used for full-scale fine-tuning runs.
  static TrainConfig paper_appendix_preset();

  infer::Mode inference_mode() const {
    return loss.scheme == loss::Scheme::kOurs ? infer::Mode::kNegativeMax
                                              : infer::Mode::kClsSpan;
  }
};

struct StepRecord {
  std::size_t epoch = 0;
  std::size_t step = 0;  // global step counter
  double loss = 0.0;
};

struct EpochEval {
  std::string name;
  metrics::Category category = metrics::Category::kHasAns;
  double f1 = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::vector<EpochEval> evals;
  // Per-epoch no-ans performance gap between the first two no-ans eval
  // sets, when two are configured.
  std::optional<double> gap;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  // One JSON object per line; step records first, then epoch records.
  void save_jsonl(const std::string& path) const;
};

struct EvalSet {
  std::string name;
  const data::Dataset* dataset = nullptr;
};

// Full training loop: builds labels once per example under cfg.loss's
// scheme (golds lost to truncation become unanswerable), shuffles with a
// per-epoch seeded stream, and evaluates every eval set at each epoch end
// with the inference rule matching the scheme. Bit-reproducible for fixed
// (cfg, data).
std::pair<nn::ModelParams, TrainLog> train(const TrainConfig& cfg,
                                           const data::Dataset& train_set,
                                           const text::Vocabulary& vocab,
                                           const std::vector<EvalSet>& eval_sets = {});

// Predictions plus the domain score for one dataset. The caller chooses
// the inference mode; it must match the scheme the params were trained
// with. Throws EmptyDataset for an empty input.
std::pair<data::PredictionFile, metrics::DomainResult> evaluate(
    const nn::ModelParams& params, const data::Dataset& d, infer::Mode mode,
    const text::Vocabulary& vocab,
    std::size_t max_answer_len = infer::kDefaultMaxAnswerLen);

// Everything needed to run a saved model: parameters, the configuration
// they were trained with, and the vocabulary that encodes inputs.
struct Checkpoint {
  nn::ModelParams params;
  TrainConfig config;
  text::Vocabulary vocab;
};

// Versioned binary container: model config, train config, vocabulary,
// named parameter tensors, FNV-1a checksum trailer. Round trips are
// bit-exact.
void save_checkpoint(const nn::ModelParams& params, const TrainConfig& cfg,
                     const text::Vocabulary& vocab, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Labels for one example under the given scheme; exposed for tests and
// the training loop. Golds that fall out of the encoding window are
// dropped; if none survive, the example is labeled unanswerable.
nn::LabeledExample make_labeled_example(const data::QAExample& ex,
                                        const text::Vocabulary& vocab, std::size_t max_len,
                                        loss::Scheme scheme);

}  // namespace eqa::train
