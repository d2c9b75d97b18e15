#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eqakit/dataset.hpp"

namespace eqa::metrics {

enum class Category { kHasAns, kNoAns };

// Mean F1 (x100) of one named evaluation domain.
struct DomainResult {
  std::string domain;
  Category category = Category::kHasAns;
  double f1 = 0.0;
};

struct AttackDelta {
  std::string attack;
  double delta = 0.0;
};

// Per-domain scores plus the equal-weight category means and, when attack
// results are supplied, the per-attack performance drops.
struct EvalReport {
  std::vector<DomainResult> domains;
  double per_has_ans = 0.0;
  double per_no_ans = 0.0;
  double per_overall = 0.0;
  std::vector<AttackDelta> attack_deltas;
  double mean_delta = 0.0;
  bool has_deltas = false;

  std::string to_json() const;    // machine-readable, stable key order
  std::string to_table() const;   // aligned text block
};

// Token-bag F1 in [0, 1] after answer normalization, maximized over the
// gold answers. Empty-vs-empty scores 1; empty-vs-nonempty scores 0. An
// unanswerable example is scored against the single gold "".
double f1(const std::string& pred_text, const std::vector<std::string>& gold_texts);

// Mean F1 x 100 over the dataset. Throws MissingPrediction listing every
// example id the prediction file lacks.
double per_dataset(const data::PredictionFile& predictions, const data::Dataset& d);

// Unweighted mean within each category; overall is the mean of the two
// category means. Throws EmptyCategory unless both categories are present.
EvalReport aggregate(const std::vector<DomainResult>& domain_results);

// Per-attack drop orig - attacked, and their mean.
std::pair<std::vector<AttackDelta>, double> robustness_delta(
    double orig, const std::vector<std::pair<std::string, double>>& attacked);

// Display convention used in reports: one decimal, ties toward zero.
double round1(double value);

}  // namespace eqa::metrics
