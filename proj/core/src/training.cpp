#include "eqakit/training.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "eqakit/errors.hpp"
#include "eqakit/rng.hpp"

namespace eqa::train {

namespace {

struct AdamState {
  nn::Gradients m;
  nn::Gradients v;
  std::size_t t = 0;
};

// Decoupled weight decay: layer-norm tensors and biases (column vectors
// and scalars) are exempt, matching common transformer fine-tuning setups.
bool decays(const std::string& name, const Eigen::MatrixXd& tensor) {
  if (tensor.cols() == 1) return false;
  return name.find("gain") == std::string::npos && name.find("bias") == std::string::npos;
}

void adamw_step(nn::ModelParams& params, const nn::Gradients& grads, AdamState& state,
                const TrainConfig& cfg) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  std::vector<const Eigen::MatrixXd*> g_list;
  nn::for_each_tensor(grads, [&g_list](const std::string&, const Eigen::MatrixXd& m) {
    g_list.push_back(&m);
  });
  std::vector<Eigen::MatrixXd*> m_list, v_list;
  nn::for_each_tensor(state.m, [&m_list](const std::string&, Eigen::MatrixXd& m) {
    m_list.push_back(&m);
  });
  nn::for_each_tensor(state.v, [&v_list](const std::string&, Eigen::MatrixXd& m) {
    v_list.push_back(&m);
  });

  std::size_t slot = 0;
  nn::for_each_tensor(params, [&](const std::string& name, Eigen::MatrixXd& p) {
    const Eigen::MatrixXd& g = *g_list[slot];
    Eigen::MatrixXd& m = *m_list[slot];
    Eigen::MatrixXd& v = *v_list[slot];
    ++slot;

    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.array().square().matrix();
    const Eigen::ArrayXXd m_hat = m.array() / bc1;
    const Eigen::ArrayXXd v_hat = v.array() / bc2;
    p.array() -= cfg.learning_rate * (m_hat / (v_hat.sqrt() + cfg.adam_eps));
    if (cfg.weight_decay > 0.0 && decays(name, p)) {
      p.array() -= cfg.learning_rate * cfg.weight_decay * p.array();
    }
  });
}

void clip_gradients(nn::Gradients& grads, double clip_norm) {
  if (!(clip_norm > 0.0)) return;
  double sq = 0.0;
  nn::for_each_tensor(static_cast<const nn::Gradients&>(grads),
                      [&sq](const std::string&, const Eigen::MatrixXd& m) {
                        sq += m.array().square().sum();
                      });
  const double norm = std::sqrt(sq);
  if (norm <= clip_norm) return;
  const double scale = clip_norm / norm;
  nn::for_each_tensor(grads,
                      [scale](const std::string&, Eigen::MatrixXd& m) { m *= scale; });
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InvalidConfig("learning_rate must be positive");
  if (loss.scheme == loss::Scheme::kOurs) {
    loss::validate_weights(loss.lambda_qa, loss.lambda_tag, model.max_len);
  }
}

TrainConfig TrainConfig::paper_appendix_preset() {
  TrainConfig cfg;
  cfg.batch_size = 8;
  cfg.epochs = 3;
  cfg.learning_rate = 2e-5;
  cfg.beta1 = 0.9;
  cfg.beta2 = 0.999;
  cfg.model.max_len = 384;
  return cfg;
}

nn::LabeledExample make_labeled_example(const data::QAExample& ex,
                                        const text::Vocabulary& vocab, std::size_t max_len,
                                        loss::Scheme scheme) {
  nn::LabeledExample out;
  out.seq = text::encode_pair(ex.question, ex.context, vocab, max_len);
  std::vector<text::TokenSpan> spans;
  for (const data::AnswerRef& gold : ex.gold_answers) {
    if (const auto span = text::align_answer(gold, out.seq)) spans.push_back(*span);
  }
  out.labels = loss::build_labels(out.seq, spans, scheme);
  return out;
}

std::pair<nn::ModelParams, TrainLog> train(const TrainConfig& cfg,
                                           const data::Dataset& train_set,
                                           const text::Vocabulary& vocab,
                                           const std::vector<EvalSet>& eval_sets) {
  cfg.validate();
  if (train_set.examples.empty()) throw EmptyDataset("training set is empty");

  std::vector<nn::LabeledExample> examples;
  examples.reserve(train_set.examples.size());
  for (const data::QAExample& ex : train_set.examples) {
    try {
      examples.push_back(make_labeled_example(ex, vocab, cfg.model.max_len, cfg.loss.scheme));
    } catch (const Error& e) {
      throw InvalidConfig("example " + ex.id + ": " + e.what());
    }
  }

  nn::ModelParams params = nn::init_params(cfg.model);
  AdamState adam{nn::zeros_like(params), nn::zeros_like(params), 0};
  TrainLog log;
  std::size_t global_step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::Stream shuffle_stream =
        rng::Stream::for_key(cfg.seed, "epoch-" + std::to_string(epoch));
    shuffle_stream.shuffle(order);

    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<nn::LabeledExample> batch;
      batch.reserve(end - begin);
      for (std::size_t i = begin; i < end; ++i) batch.push_back(examples[order[i]]);

      auto [loss_value, grads] = nn::loss_and_grads(params, batch, cfg.loss);
      clip_gradients(grads, cfg.clip_norm);
      adamw_step(params, grads, adam, cfg);
      log.steps.push_back({epoch + 1, ++global_step, loss_value});
    }

    EpochRecord record;
    record.epoch = epoch + 1;
    std::vector<double> no_ans_scores;
    for (const EvalSet& eval_set : eval_sets) {
      const auto [_, result] =
          evaluate(params, *eval_set.dataset, cfg.inference_mode(), vocab, cfg.max_answer_len);
      record.evals.push_back({eval_set.name, result.category, result.f1});
      if (result.category == metrics::Category::kNoAns) no_ans_scores.push_back(result.f1);
    }
    if (no_ans_scores.size() >= 2) record.gap = no_ans_scores[0] - no_ans_scores[1];
    log.epochs.push_back(std::move(record));
  }
  return {std::move(params), std::move(log)};
}

std::pair<data::PredictionFile, metrics::DomainResult> evaluate(
    const nn::ModelParams& params, const data::Dataset& d, infer::Mode mode,
    const text::Vocabulary& vocab, std::size_t max_answer_len) {
  if (d.examples.empty()) throw EmptyDataset("dataset '" + d.name + "' has no examples");

  data::PredictionFile predictions;
  bool any_answerable = false;
  for (const data::QAExample& ex : d.examples) {
    const text::TokenizedSequence seq =
        text::encode_pair(ex.question, ex.context, vocab, params.config.max_len);
    const nn::HeadLogits logits = nn::forward(params, seq);
    const infer::Prediction pred = infer::predict(logits, seq, mode, max_answer_len);
    predictions[ex.id] = pred.text;
    any_answerable = any_answerable || ex.is_answerable;
  }

  metrics::DomainResult result;
  result.domain = d.name;
  result.category = any_answerable ? metrics::Category::kHasAns : metrics::Category::kNoAns;
  result.f1 = metrics::per_dataset(predictions, d);
  return {std::move(predictions), result};
}

void TrainLog::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoFailure("cannot open log file for writing: " + path);
  for (const StepRecord& s : steps) {
    out << nlohmann::ordered_json{{"type", "step"},
                                  {"epoch", s.epoch},
                                  {"step", s.step},
                                  {"loss", s.loss}}
               .dump()
        << '\n';
  }
  for (const EpochRecord& e : epochs) {
    nlohmann::ordered_json evals = nlohmann::ordered_json::array();
    for (const EpochEval& ev : e.evals) {
      evals.push_back(
          {{"name", ev.name},
           {"category", ev.category == metrics::Category::kHasAns ? "has_ans" : "no_ans"},
           {"f1", ev.f1}});
    }
    nlohmann::ordered_json rec{{"type", "epoch"}, {"epoch", e.epoch}, {"evals", evals}};
    if (e.gap) rec["gap"] = *e.gap;
    out << rec.dump() << '\n';
  }
  if (!out) throw IoFailure("write failed: " + path);
}

}  // namespace eqa::train
