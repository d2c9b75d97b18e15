#include "eqakit/losses.hpp"

#include <cmath>

#include "eqakit/errors.hpp"

namespace eqa::loss {

namespace {

void require_scheme(const SpanLabels& labels, Scheme expected, const char* op) {
  if (labels.scheme != expected) {
    throw LabelSchemeMismatch(std::string(op) + ": labels built for the other scheme");
  }
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

// Cross entropy of one side: -sum_k y_k * log softmax(x)_k.
double side_ce(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return -(log_softmax(x).array() * y.array()).sum();
}

// Binary cross entropy of one side: -sum_k [y log sigma + (1-y) log(1-sigma)].
double side_bce(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    // log(1 - sigma(x)) == log_sigmoid(-x)
    total -= y[k] * log_sigmoid(x[k]) + (1.0 - y[k]) * log_sigmoid(-x[k]);
  }
  return total;
}

}  // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  Eigen::VectorXd z = (x.array() - m).exp();
  return z / z.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& x) {
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  return x.array() - lse;
}

double log_sigmoid(double x) {
  // -log(1 + exp(-x)) for x >= 0, x - log(1 + exp(x)) otherwise.
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

SpanLabels build_labels(const text::TokenizedSequence& seq,
                        const std::vector<text::TokenSpan>& gold_spans, Scheme scheme) {
  const auto n = static_cast<Eigen::Index>(seq.n);
  for (const text::TokenSpan& span : gold_spans) {
    if (span.first > span.last || !seq.is_context_token(span.first) ||
        !seq.is_context_token(span.last)) {
      throw SpanOutOfRange("gold token span [" + std::to_string(span.first) + ", " +
                           std::to_string(span.last) + "] is not inside the context segment");
    }
  }

  SpanLabels labels;
  labels.scheme = scheme;
  labels.is_answerable = !gold_spans.empty();
  labels.y_start = Eigen::VectorXd::Zero(n);
  labels.y_end = Eigen::VectorXd::Zero(n);
  if (scheme == Scheme::kOurs) {
    labels.tag_start = Eigen::VectorXd::Zero(n);
    labels.tag_end = Eigen::VectorXd::Zero(n);
  }

  if (labels.is_answerable) {
    const double mass = 1.0 / static_cast<double>(gold_spans.size());
    for (const text::TokenSpan& span : gold_spans) {
      labels.y_start[static_cast<Eigen::Index>(span.first)] += mass;
      labels.y_end[static_cast<Eigen::Index>(span.last)] += mass;
      if (scheme == Scheme::kOurs) {
        labels.tag_start[static_cast<Eigen::Index>(span.first)] = 1.0;
        labels.tag_end[static_cast<Eigen::Index>(span.last)] = 1.0;
      }
    }
  } else if (scheme == Scheme::kDefault) {
    // No answer: both one-hots at the classification token.
    labels.y_start[0] = 1.0;
    labels.y_end[0] = 1.0;
  } else {
    labels.y_start.setConstant(1.0 / static_cast<double>(n));
    labels.y_end.setConstant(1.0 / static_cast<double>(n));
  }
  return labels;
}

void validate_weights(double lambda_qa, double lambda_tag, std::size_t n) {
  if (!(lambda_qa > 0.0)) {
    throw InvalidConfig("lambda_qa must be positive");
  }
  if (lambda_tag < 0.0) {
    throw InvalidConfig("lambda_tag must be nonnegative");
  }
  if (n == 0) throw InvalidConfig("sequence length must be >= 1");
  const double ratio = lambda_tag / lambda_qa;
  const double bound = 2.0 / static_cast<double>(n);
  if (!(ratio > bound)) {
    throw WeightRatioViolation(
        ratio, bound,
        "lambda_tag/lambda_qa = " + std::to_string(ratio) + " must exceed 2/n = " +
            std::to_string(bound) + "; unanswerable logits would not all decrease");
  }
}

double qa_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e, const SpanLabels& labels) {
  return side_ce(s, labels.y_start) + side_ce(e, labels.y_end);
}

double tag_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e, const SpanLabels& labels) {
  require_scheme(labels, Scheme::kOurs, "tag_loss");
  return side_bce(s, labels.tag_start) + side_bce(e, labels.tag_end);
}

double default_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                    const SpanLabels& labels) {
  require_scheme(labels, Scheme::kDefault, "default_loss");
  return qa_loss(s, e, labels);
}

double combined_loss(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                     const SpanLabels& labels, double lambda_qa, double lambda_tag) {
  require_scheme(labels, Scheme::kOurs, "combined_loss");
  validate_weights(lambda_qa, lambda_tag, static_cast<std::size_t>(labels.n()));
  return lambda_qa * qa_loss(s, e, labels) + lambda_tag * tag_loss(s, e, labels);
}

double loss_value(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                  const SpanLabels& labels, const LossSpec& spec) {
  if (spec.scheme == Scheme::kDefault) return default_loss(s, e, labels);
  return combined_loss(s, e, labels, spec.lambda_qa, spec.lambda_tag);
}

LogitGrads loss_logit_grads(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                            const SpanLabels& labels, const LossSpec& spec) {
  LogitGrads g;
  g.value = loss_value(s, e, labels, spec);

  // d/dx of softmax CE is softmax(x) - y, for label rows summing to 1.
  if (spec.scheme == Scheme::kDefault) {
    g.ds = softmax(s) - labels.y_start;
    g.de = softmax(e) - labels.y_end;
    return g;
  }
  g.ds = spec.lambda_qa * (softmax(s) - labels.y_start);
  g.de = spec.lambda_qa * (softmax(e) - labels.y_end);
  // d/dx of sigmoid BCE is sigma(x) - y.
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    g.ds[k] += spec.lambda_tag * (sigmoid(s[k]) - labels.tag_start[k]);
    g.de[k] += spec.lambda_tag * (sigmoid(e[k]) - labels.tag_end[k]);
  }
  return g;
}

}  // namespace eqa::loss
