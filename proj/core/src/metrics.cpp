#include "eqakit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eqakit/errors.hpp"
#include "eqakit/text.hpp"

namespace eqa::metrics {

namespace {

std::vector<std::string> normalized_tokens(const std::string& answer) {
  std::vector<std::string> out;
  std::istringstream ss(text::normalize_answer(answer));
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double f1_single(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) {
    return (pred.empty() && gold.empty()) ? 1.0 : 0.0;
  }
  std::map<std::string, int> gold_counts;
  for (const std::string& g : gold) ++gold_counts[g];
  int overlap = 0;
  for (const std::string& p : pred) {
    auto it = gold_counts.find(p);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double f1(const std::string& pred_text, const std::vector<std::string>& gold_texts) {
  const std::vector<std::string> pred = normalized_tokens(pred_text);
  double best = 0.0;
  if (gold_texts.empty()) {
    // No golds supplied at all: treat as unanswerable gold "".
    return f1_single(pred, {});
  }
  for (const std::string& gold_text : gold_texts) {
    best = std::max(best, f1_single(pred, normalized_tokens(gold_text)));
  }
  return best;
}

double per_dataset(const data::PredictionFile& predictions, const data::Dataset& d) {
  if (d.examples.empty()) throw EmptyDataset("dataset '" + d.name + "' has no examples");

  std::string missing;
  for (const data::QAExample& ex : d.examples) {
    if (!predictions.count(ex.id)) {
      if (!missing.empty()) missing += ", ";
      missing += ex.id;
    }
  }
  if (!missing.empty()) {
    throw MissingPrediction("no prediction for example id(s): " + missing);
  }

  double total = 0.0;
  for (const data::QAExample& ex : d.examples) {
    std::vector<std::string> golds;
    if (ex.is_answerable) {
      for (const data::AnswerRef& a : ex.gold_answers) golds.push_back(a.text);
    } else {
      golds.push_back("");
    }
    total += f1(predictions.at(ex.id), golds);
  }
  return 100.0 * total / static_cast<double>(d.examples.size());
}

EvalReport aggregate(const std::vector<DomainResult>& domain_results) {
  double has_sum = 0.0, no_sum = 0.0;
  std::size_t has_count = 0, no_count = 0;
  for (const DomainResult& r : domain_results) {
    if (r.category == Category::kHasAns) {
      has_sum += r.f1;
      ++has_count;
    } else {
      no_sum += r.f1;
      ++no_count;
    }
  }
  if (has_count == 0 || no_count == 0) {
    throw EmptyCategory(std::string("aggregate needs at least one domain per category; ") +
                        "has-ans: " + std::to_string(has_count) +
                        ", no-ans: " + std::to_string(no_count));
  }
  EvalReport report;
  report.domains = domain_results;
  report.per_has_ans = has_sum / static_cast<double>(has_count);
  report.per_no_ans = no_sum / static_cast<double>(no_count);
  report.per_overall = 0.5 * (report.per_has_ans + report.per_no_ans);
  return report;
}

std::pair<std::vector<AttackDelta>, double> robustness_delta(
    double orig, const std::vector<std::pair<std::string, double>>& attacked) {
  if (attacked.empty()) throw InvalidConfig("robustness_delta needs at least one attack");
  std::vector<AttackDelta> deltas;
  double sum = 0.0;
  for (const auto& [name, value] : attacked) {
    deltas.push_back({name, orig - value});
    sum += orig - value;
  }
  return {std::move(deltas), sum / static_cast<double>(attacked.size())};
}

double round1(double value) {
  // Ties round toward zero: 40.75 displays as 40.7.
  if (value == 0.0) return 0.0;
  return std::copysign(std::ceil(std::abs(value) * 10.0 - 0.5), value) / 10.0;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["domains"] = nlohmann::ordered_json::array();
  for (const DomainResult& r : domains) {
    doc["domains"].push_back({{"name", r.domain},
                              {"category", r.category == Category::kHasAns ? "has_ans" : "no_ans"},
                              {"f1", r.f1}});
  }
  doc["per_has_ans"] = per_has_ans;
  doc["per_no_ans"] = per_no_ans;
  doc["per_overall"] = per_overall;
  if (has_deltas) {
    doc["attacks"] = nlohmann::ordered_json::array();
    for (const AttackDelta& d : attack_deltas) {
      doc["attacks"].push_back({{"name", d.attack}, {"delta", d.delta}});
    }
    doc["mean_delta"] = mean_delta;
  }
  return doc.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  std::size_t width = 12;
  for (const DomainResult& r : domains) width = std::max(width, r.domain.size() + 2);
  for (const AttackDelta& d : attack_deltas) width = std::max(width, d.attack.size() + 8);
  for (const DomainResult& r : domains) {
    out << std::left << std::setw(static_cast<int>(width)) << r.domain << std::right
        << std::setw(6) << (r.category == Category::kHasAns ? "has" : "no") << std::setw(8)
        << round1(r.f1) << '\n';
  }
  out << std::left << std::setw(static_cast<int>(width)) << "per has-ans" << std::right
      << std::setw(14) << round1(per_has_ans) << '\n';
  out << std::left << std::setw(static_cast<int>(width)) << "per no-ans" << std::right
      << std::setw(14) << round1(per_no_ans) << '\n';
  out << std::left << std::setw(static_cast<int>(width)) << "overall" << std::right
      << std::setw(14) << round1(per_overall) << '\n';
  if (has_deltas) {
    for (const AttackDelta& d : attack_deltas) {
      out << std::left << std::setw(static_cast<int>(width)) << ("delta " + d.attack)
          << std::right << std::setw(14) << round1(d.delta) << '\n';
    }
    out << std::left << std::setw(static_cast<int>(width)) << "mean delta" << std::right
        << std::setw(14) << round1(mean_delta) << '\n';
  }
  return out.str();
}

}  // namespace eqa::metrics
