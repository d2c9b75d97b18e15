#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "eqakit/encode.hpp"
#include "eqakit/losses.hpp"

namespace eqa::nn {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t ffn_dim = 128;
  std::size_t max_len = 384;
  std::uint64_t seed = 0;

  void validate() const;  // throws InvalidConfig

  bool operator==(const ModelConfig&) const = default;
};

// One pre-norm transformer block: attention and feed-forward sublayers,
// each with a residual connection.
struct LayerParams {
  Eigen::MatrixXd wq, wk, wv, wo;              // embed_dim x embed_dim
  Eigen::MatrixXd bq, bk, bv, bo;              // embed_dim x 1
  Eigen::MatrixXd ln1_gain, ln1_bias;          // embed_dim x 1
  Eigen::MatrixXd ln2_gain, ln2_bias;          // embed_dim x 1
  Eigen::MatrixXd w_in, w_out;                 // d x ffn, ffn x d
  Eigen::MatrixXd b_in, b_out;                 // ffn x 1, d x 1
};

// All trainable tensors. The start/end heads are single affine maps from
// the final contextual vector to one scalar each.
struct ModelParams {
  ModelConfig config;
  Eigen::MatrixXd tok_embed;  // vocab x d
  Eigen::MatrixXd pos_embed;  // max_len x d
  std::vector<LayerParams> layers;
  Eigen::MatrixXd lnf_gain, lnf_bias;  // embed_dim x 1
  Eigen::MatrixXd start_w, end_w;      // embed_dim x 1
  Eigen::MatrixXd start_b, end_b;      // 1 x 1
};

// Raw per-token start/end scores. No masking is baked in: inference
// decides which positions are eligible span endpoints via context_mask.
struct HeadLogits {
  Eigen::VectorXd s;
  Eigen::VectorXd e;
  std::vector<std::uint8_t> context_mask;  // 1 = usable context token
};

// Gradients share the parameter layout.
using Gradients = ModelParams;

// Deterministic scaled-uniform initialization; biases and layer-norm
// offsets start at zero, gains at one.
ModelParams init_params(const ModelConfig& cfg);

// Same tensor shapes as params, all values zero.
Gradients zeros_like(const ModelParams& params);

// Visits every tensor in a fixed documented order. The order defines the
// checkpoint layout and the finite-difference sweep.
void for_each_tensor(ModelParams& params,
                     const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn);
void for_each_tensor(const ModelParams& params,
                     const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn);

// Pure function of (params, seq). Throws ShapeMismatch when seq.n differs
// from config.max_len or a token id falls outside the embedding table.
HeadLogits forward(const ModelParams& params, const text::TokenizedSequence& seq);

struct LabeledExample {
  text::TokenizedSequence seq;
  loss::SpanLabels labels;
};

// Mean loss over the batch plus exact analytic gradients of every
// parameter. Examples are processed in order; the reduction order is
// fixed so results are bit-reproducible.
std::pair<double, Gradients> loss_and_grads(const ModelParams& params,
                                            const std::vector<LabeledExample>& batch,
                                            const loss::LossSpec& spec);

// Mean batch loss without gradients (the function the oracle probes).
double batch_loss(const ModelParams& params, const std::vector<LabeledExample>& batch,
                  const loss::LossSpec& spec);

// Central-difference estimate of every parameter derivative. Independent
// of the analytic backward pass; used as its oracle.
Gradients finite_diff_grads(const ModelParams& params,
                            const std::vector<LabeledExample>& batch,
                            const loss::LossSpec& spec, double eps);

// Central differences at the logit level: derivatives of the loss with
// respect to each start/end score, labels held fixed.
loss::LogitGrads finite_diff_logit_grads(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                                         const loss::SpanLabels& labels,
                                         const loss::LossSpec& spec, double eps);

// Central difference of a scalar function; the primitive behind both
// finite-difference oracles.
double central_difference(const std::function<double(double)>& f, double x, double eps);

}  // namespace eqa::nn
