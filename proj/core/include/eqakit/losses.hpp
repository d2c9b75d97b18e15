#pragma once

#include <Eigen/Core>
#include <vector>

#include "eqakit/encode.hpp"

namespace eqa::loss {

enum class Scheme { kDefault, kOurs };

// Which loss to train/evaluate with. The lambda weights only apply to
// kOurs; validate_weights() must hold for the sequence length in use.
struct LossSpec {
  Scheme scheme = Scheme::kDefault;
  double lambda_qa = 2.0;
  double lambda_tag = 1.0;

  static LossSpec Default() { return {Scheme::kDefault, 0.0, 0.0}; }
  static LossSpec Ours(double lambda_qa = 2.0, double lambda_tag = 1.0) {
    return {Scheme::kOurs, lambda_qa, lambda_tag};
  }
};

// Per-token start/end supervision.
//
// Default scheme: one-hot rows; an unanswerable sequence points both
// one-hots at position 0. Ours scheme: answerable rows put 1/m on each of
// the m gold starts/ends and set the binary tag rows at the golds;
// unanswerable rows are uniform 1/n with all-zero tags.
struct SpanLabels {
  Scheme scheme = Scheme::kDefault;
  Eigen::VectorXd y_start;
  Eigen::VectorXd y_end;
  Eigen::VectorXd tag_start;  // kOurs only, 0/1
  Eigen::VectorXd tag_end;    // kOurs only, 0/1
  bool is_answerable = false;

  Eigen::Index n() const { return y_start.size(); }
};

// Builds labels for the given gold token spans (empty list = unanswerable,
// which is also the fallback for answers lost to truncation). Spans must
// lie in the context segment of seq.
SpanLabels build_labels(const text::TokenizedSequence& seq,
                        const std::vector<text::TokenSpan>& gold_spans, Scheme scheme);

// Throws WeightRatioViolation unless lambda_tag / lambda_qa > 2 / n.
void validate_weights(double lambda_qa, double lambda_tag, std::size_t n);

// Softmax cross entropy against y_start/y_end, summed over both sides.
double qa_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e, const SpanLabels& labels);

// Per-token sigmoid binary cross entropy against the tag rows, summed over
// both sides and all positions. Labels must carry tag vectors (kOurs).
double tag_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e, const SpanLabels& labels);

// The qa_loss formula applied to kDefault labels.
double default_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                    const SpanLabels& labels);

// lambda_qa * qa_loss + lambda_tag * tag_loss; validates the weight ratio.
double combined_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                     const SpanLabels& labels, double lambda_qa, double lambda_tag);

// Scheme dispatch: default_loss for kDefault, combined_loss for kOurs.
double loss_value(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                  const SpanLabels& labels, const LossSpec& spec);

struct LogitGrads {
  double value = 0.0;
  Eigen::VectorXd ds;
  Eigen::VectorXd de;
};

// Loss plus its exact derivative with respect to every start/end logit.
LogitGrads loss_logit_grads(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                            const SpanLabels& labels, const LossSpec& spec);

// Stable helpers, exposed for reuse by the encoder and tests.
Eigen::VectorXd softmax(const Eigen::VectorXd& x);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& x);
double log_sigmoid(double x);  // log(sigma(x)) without overflow

}  // namespace eqa::loss
