#include "eqakit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "eqakit/attacks.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/metrics.hpp"
#include "eqakit/utf8.hpp"
#include "splice_util.hpp"
#include "statement_util.hpp"

namespace eqa::aug {

namespace {

std::vector<std::string> gold_texts(const data::QAExample& ex) {
  std::vector<std::string> out;
  for (const data::AnswerRef& g : ex.gold_answers) out.push_back(g.text);
  return out;
}

bool clears_f1_constraint(const std::string& candidate, const std::vector<std::string>& golds) {
  return metrics::f1(candidate, golds) < kMaxSyntheticF1;
}

std::optional<std::string> select_by_vote(const data::QAExample& ex,
                                          const CandidateProvider& provider) {
  std::map<std::string, std::size_t> votes;
  for (const data::PredictionFile& file : provider.prediction_files) {
    auto it = file.find(ex.id);
    if (it == file.end() || it->second.empty()) continue;
    ++votes[it->second];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(votes.begin(), votes.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const std::vector<std::string> golds = gold_texts(ex);
  for (const auto& [candidate, _] : ranked) {
    if (clears_f1_constraint(candidate, golds)) return candidate;
  }
  return std::nullopt;
}

std::optional<std::string> select_by_embedding(const data::QAExample& ex,
                                               const CandidateProvider& provider) {
  if (provider.resources == nullptr || provider.resources->embeddings.empty()) {
    return std::nullopt;
  }
  const text::EmbeddingTable& table = provider.resources->embeddings;

  auto mean_vector = [&table](const std::vector<text::Token>& tokens, std::size_t from,
                              std::size_t to) -> std::optional<std::vector<double>> {
    std::vector<double> mean(table.dim, 0.0);
    std::size_t found = 0;
    for (std::size_t t = from; t <= to; ++t) {
      auto it = table.index.find(tokens[t].surface);
      if (it == table.index.end()) continue;
      for (std::size_t d = 0; d < table.dim; ++d) mean[d] += table.vectors[it->second][d];
      ++found;
    }
    if (found == 0) return std::nullopt;
    for (double& v : mean) v /= static_cast<double>(found);
    return mean;
  };

  const std::vector<text::Token> gold_tokens = text::tokenize(ex.gold_answers.front().text);
  if (gold_tokens.empty()) return std::nullopt;
  const auto gold_vec = mean_vector(gold_tokens, 0, gold_tokens.size() - 1);
  if (!gold_vec) return std::nullopt;

  const std::u32string ctx = utf8::decode(ex.context);
  const std::vector<text::Token> ctx_tokens = text::tokenize(ex.context);

  struct Candidate {
    double score;
    std::size_t first, last;
    std::string text;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < ctx_tokens.size(); ++i) {
    for (std::size_t j = i; j < std::min(ctx_tokens.size(), i + provider.max_span_tokens); ++j) {
      const std::size_t span_begin = ctx_tokens[i].span.begin;
      const std::size_t span_end = ctx_tokens[j].span.end;
      bool overlaps_gold = false;
      for (const data::AnswerRef& g : ex.gold_answers) {
        const std::size_t g_end = g.start + utf8::length(g.text);
        if (span_begin < g_end && span_end > g.start) {
          overlaps_gold = true;
          break;
        }
      }
      if (overlaps_gold) continue;
      const auto vec = mean_vector(ctx_tokens, i, j);
      if (!vec) continue;
      double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
      for (std::size_t d = 0; d < table.dim; ++d) {
        dot += (*vec)[d] * (*gold_vec)[d];
        norm_a += (*vec)[d] * (*vec)[d];
        norm_b += (*gold_vec)[d] * (*gold_vec)[d];
      }
      const double denom = std::sqrt(norm_a) * std::sqrt(norm_b);
      if (!(denom > 0.0)) continue;
      candidates.push_back(
          {dot / denom, i, j, utf8::encode(ctx.substr(span_begin, span_end - span_begin))});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.first != b.first) return a.first < b.first;
    return a.last < b.last;
  });
  const std::vector<std::string> golds = gold_texts(ex);
  for (const Candidate& c : candidates) {
    if (clears_f1_constraint(c.text, golds)) return c.text;
  }
  return std::nullopt;
}

}  // namespace

CandidateProvider CandidateProvider::ensemble_vote(std::vector<data::PredictionFile> files) {
  CandidateProvider p;
  p.strategy = Strategy::kEnsembleVote;
  p.prediction_files = std::move(files);
  return p;
}

CandidateProvider CandidateProvider::embedding_span(const text::LexicalResources* res,
                                                    std::size_t max_span_tokens) {
  CandidateProvider p;
  p.strategy = Strategy::kEmbeddingSpan;
  p.resources = res;
  p.max_span_tokens = max_span_tokens;
  return p;
}

std::optional<std::string> select_synthetic_answer(const data::QAExample& ex,
                                                   const CandidateProvider& provider) {
  if (!ex.is_answerable) return std::nullopt;
  if (provider.strategy == CandidateProvider::Strategy::kEnsembleVote) {
    return select_by_vote(ex, provider);
  }
  return select_by_embedding(ex, provider);
}

StatementResult TemplateBackend::generate(const std::string& question,
                                          const std::string& answer) {
  StatementResult out;
  out.text = attack::statement_from(question, answer, *resources_);
  out.provenance = Provenance::kTemplate;
  return out;
}

std::optional<std::pair<std::string, std::size_t>> insert_statement(
    const std::string& context, const std::string& statement, rng::Stream& stream) {
  const std::vector<std::size_t> internal = text::sentence_boundaries(context);
  if (internal.empty()) return std::nullopt;
  const std::size_t b = internal[stream.next_index(internal.size())];
  return std::make_pair(detail::splice_sentence(context, statement, b), b);
}

AugmentResult augment_dataset(const data::Dataset& d, double fraction,
                              const CandidateProvider& provider, StatementBackend& backend,
                              std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw InvalidConfig("fraction must be in (0, 1]");
  }

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    if (d.examples[i].is_answerable) pool.push_back(i);
  }

  AugmentResult result;
  result.dataset = d;
  result.quota =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool.size())));

  rng::Stream master(seed);
  master.shuffle(pool);

  std::vector<std::pair<std::size_t, SyntheticRecord>> records;
  for (std::size_t idx : pool) {
    if (result.augmented == result.quota) break;
    const data::QAExample& ex = d.examples[idx];

    const auto answer = select_synthetic_answer(ex, provider);
    if (!answer) {
      ++result.skipped;
      continue;
    }
    const StatementResult stmt = backend.generate(ex.question, *answer);
    const auto located = detail::find_answer_in_statement(stmt.text, *answer);
    if (!located) {
      ++result.skipped;
      continue;
    }

    // Strictly between existing sentences; a boundary inside a gold answer
    // is not usable.
    const std::vector<std::size_t> points =
        detail::insertion_points(ex.context, ex.gold_answers, /*include_end=*/false);
    if (points.empty()) {
      ++result.skipped;
      continue;
    }
    rng::Stream stream = rng::Stream::for_key(seed, ex.id);
    const std::size_t b = points[stream.next_index(points.size())];

    data::QAExample augmented = ex;
    augmented.context = detail::splice_sentence(ex.context, stmt.text, b);
    augmented.gold_answers =
        detail::remap_golds(ex.gold_answers, b, utf8::length(stmt.text) + 1);
    augmented.gold_answers.push_back(data::AnswerRef{located->second, b + located->first});
    augmented.validate();
    result.dataset.examples[idx] = std::move(augmented);

    SyntheticRecord record;
    record.id = ex.id;
    record.synthetic_answer = located->second;
    record.statement = stmt.text;
    record.insert_offset = b;
    record.provenance = stmt.provenance;
    record.backend_fell_back = stmt.fell_back;
    records.emplace_back(idx, std::move(record));
    ++result.augmented;
  }

  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [_, rec] : records) result.records.push_back(std::move(rec));
  return result;
}

data::Dataset strip_support_sentence(const data::Dataset& d,
                                     const std::vector<SyntheticRecord>& records) {
  std::map<std::string, const SyntheticRecord*> by_id;
  for (const SyntheticRecord& r : records) by_id[r.id] = &r;

  data::Dataset out;
  out.name = d.name + "-stripped";
  out.examples.reserve(d.examples.size());

  std::size_t matched = 0;
  for (const data::QAExample& ex : d.examples) {
    auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      out.examples.push_back(ex);
      continue;
    }
    ++matched;
    const SyntheticRecord& rec = *it->second;
    const std::u32string ctx = utf8::decode(ex.context);
    const std::u32string stmt = utf8::decode(rec.statement);
    const std::u32string answer = utf8::decode(rec.synthetic_answer);
    const std::size_t b = rec.insert_offset;
    if (b + stmt.size() > ctx.size() || ctx.substr(b, stmt.size()) != stmt) {
      throw RecordMismatch("example " + ex.id +
                           ": recorded statement not found at its insert offset");
    }

    data::QAExample stripped = ex;
    stripped.context =
        utf8::encode(ctx.substr(0, b) + answer + ctx.substr(b + stmt.size()));

    // The synthetic answer stops being a gold; original golds shift left.
    const std::size_t stmt_end = b + stmt.size();
    stripped.gold_answers.clear();
    bool dropped = false;
    for (const data::AnswerRef& g : ex.gold_answers) {
      if (!dropped && g.text == rec.synthetic_answer && g.start >= b && g.start < stmt_end) {
        dropped = true;
        continue;
      }
      data::AnswerRef moved = g;
      if (moved.start >= stmt_end) moved.start = moved.start - stmt.size() + answer.size();
      stripped.gold_answers.push_back(moved);
    }
    if (!dropped) {
      throw RecordMismatch("example " + ex.id +
                           ": recorded synthetic answer is not among the golds");
    }
    stripped.is_answerable = !stripped.gold_answers.empty();
    stripped.validate();
    out.examples.push_back(std::move(stripped));
  }
  if (matched != records.size()) {
    throw RecordMismatch("records reference example ids missing from the dataset");
  }
  return out;
}

}  // namespace eqa::aug
