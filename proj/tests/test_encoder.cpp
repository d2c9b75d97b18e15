#include <doctest.h>

#include <cmath>

#include "eqakit/encoder.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/rng.hpp"

using namespace eqa;

namespace {

nn::ModelConfig tiny_config(std::uint64_t seed = 0, std::size_t max_len = 12) {
  nn::ModelConfig cfg;
  cfg.vocab_size = 24;
  cfg.embed_dim = 8;
  cfg.num_layers = 2;
  cfg.num_heads = 2;
  cfg.ffn_dim = 16;
  cfg.max_len = max_len;
  cfg.seed = seed;
  return cfg;
}

// A synthetic sequence straight from token ids; spans are not used by the
// encoder, and the context segment is everything between the separator
// and the pads.
text::TokenizedSequence synthetic_seq(const std::vector<std::int32_t>& ids,
                                      std::size_t context_start, std::size_t context_len) {
  text::TokenizedSequence seq;
  seq.tokens = ids;
  seq.n = ids.size();
  seq.cls_index = 0;
  seq.sep_index = context_start - 1;
  seq.context_start = context_start;
  seq.context_len = context_len;
  seq.surface.assign(seq.n, "");
  seq.char_spans.assign(seq.n, text::CharSpan{text::kNoSpanMarker, text::kNoSpanMarker});
  return seq;
}

text::TokenizedSequence random_seq(rng::Stream& stream, const nn::ModelConfig& cfg) {
  std::vector<std::int32_t> ids(cfg.max_len, text::Vocabulary::kPad);
  const std::size_t q_len = 1 + stream.next_index(3);
  const std::size_t c_len = 1 + stream.next_index(cfg.max_len - q_len - 2);
  ids[0] = text::Vocabulary::kCls;
  for (std::size_t i = 0; i < q_len; ++i) {
    ids[1 + i] = static_cast<std::int32_t>(4 + stream.next_index(cfg.vocab_size - 4));
  }
  ids[1 + q_len] = text::Vocabulary::kSep;
  for (std::size_t i = 0; i < c_len; ++i) {
    ids[2 + q_len + i] = static_cast<std::int32_t>(4 + stream.next_index(cfg.vocab_size - 4));
  }
  return synthetic_seq(ids, 2 + q_len, c_len);
}

loss::SpanLabels random_labels(rng::Stream& stream, const text::TokenizedSequence& seq,
                               loss::Scheme scheme) {
  std::vector<text::TokenSpan> spans;
  if (stream.next_unit() < 0.6) {
    const std::size_t first = seq.context_start + stream.next_index(seq.context_len);
    const std::size_t last =
        first + stream.next_index(seq.context_start + seq.context_len - first);
    spans.push_back({first, last});
  }
  return loss::build_labels(seq, spans, scheme);
}

double max_relative_error(const nn::Gradients& analytic, const nn::Gradients& numeric) {
  double worst = 0.0;
  std::vector<const Eigen::MatrixXd*> a_list, n_list;
  nn::for_each_tensor(analytic, [&a_list](const std::string&, const Eigen::MatrixXd& m) {
    a_list.push_back(&m);
  });
  nn::for_each_tensor(numeric, [&n_list](const std::string&, const Eigen::MatrixXd& m) {
    n_list.push_back(&m);
  });
  for (std::size_t t = 0; t < a_list.size(); ++t) {
    const auto& a = *a_list[t];
    const auto& n = *n_list[t];
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double denom = std::max({std::abs(a(r, c)), std::abs(n(r, c)), 1e-2});
        worst = std::max(worst, std::abs(a(r, c) - n(r, c)) / denom);
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("init_params is deterministic in the seed") {
  const auto cfg = tiny_config(42);
  const auto a = nn::init_params(cfg);
  const auto b = nn::init_params(cfg);
  bool identical = true;
  std::vector<const Eigen::MatrixXd*> bt;
  nn::for_each_tensor(b, [&bt](const std::string&, const Eigen::MatrixXd& m) { bt.push_back(&m); });
  std::size_t slot = 0;
  nn::for_each_tensor(a, [&](const std::string&, const Eigen::MatrixXd& m) {
    identical = identical && m == *bt[slot++];
  });
  CHECK(identical);

  const auto c = nn::init_params(tiny_config(43));
  CHECK(a.tok_embed != c.tok_embed);
}

TEST_CASE("init_params validates the configuration") {
  auto cfg = tiny_config();
  cfg.embed_dim = 63;
  cfg.num_heads = 2;
  CHECK_THROWS_AS(nn::init_params(cfg), InvalidConfig);
  cfg = tiny_config();
  cfg.num_layers = 0;
  CHECK_THROWS_AS(nn::init_params(cfg), InvalidConfig);
}

TEST_CASE("forward with zeroed heads emits the bias at every position") {
  const auto cfg = tiny_config(1);
  auto params = nn::init_params(cfg);
  params.start_w.setZero();
  params.end_w.setZero();
  params.start_b(0, 0) = 0.25;
  params.end_b(0, 0) = -0.5;

  rng::Stream stream(2);
  const auto seq = random_seq(stream, cfg);
  const auto logits = nn::forward(params, seq);
  for (Eigen::Index k = 0; k < logits.s.size(); ++k) {
    CHECK(logits.s[k] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(logits.e[k] == doctest::Approx(-0.5).epsilon(1e-12));
  }
}

TEST_CASE("forward is deterministic and masks pad ids exactly") {
  const auto cfg = tiny_config(3);
  const auto params = nn::init_params(cfg);
  rng::Stream stream(4);
  const auto seq = random_seq(stream, cfg);

  const auto first = nn::forward(params, seq);
  const auto second = nn::forward(params, seq);
  CHECK(first.s == second.s);
  CHECK(first.e == second.e);

  // Changing the token id stored at a pad position cannot move any
  // non-pad logit.
  auto permuted = seq;
  const std::size_t content_end = seq.context_start + seq.context_len;
  REQUIRE(content_end < seq.n);
  permuted.tokens[seq.n - 1] = 7;
  const auto third = nn::forward(params, permuted);
  for (std::size_t k = 0; k < content_end; ++k) {
    CHECK(first.s[static_cast<Eigen::Index>(k)] == third.s[static_cast<Eigen::Index>(k)]);
    CHECK(first.e[static_cast<Eigen::Index>(k)] == third.e[static_cast<Eigen::Index>(k)]);
  }
}

TEST_CASE("forward rejects shape violations") {
  const auto cfg = tiny_config(5);
  const auto params = nn::init_params(cfg);
  rng::Stream stream(6);
  auto seq = random_seq(stream, cfg);
  seq.tokens.push_back(0);
  seq.n += 1;
  CHECK_THROWS_AS(nn::forward(params, seq), ShapeMismatch);

  auto bad_ids = random_seq(stream, cfg);
  bad_ids.tokens[2] = static_cast<std::int32_t>(cfg.vocab_size);
  CHECK_THROWS_AS(nn::forward(params, bad_ids), ShapeMismatch);
}

TEST_CASE("central_difference recovers a known derivative") {
  const auto square = [](double x) { return x * x; };
  CHECK(nn::central_difference(square, 3.0, 1e-4) == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("central difference error shrinks quadratically in eps") {
  const auto cube = [](double x) { return x * x * x; };  // f''' != 0
  const double exact = 12.0;                             // d/dx x^3 at x=2
  const double err1 = std::abs(nn::central_difference(cube, 2.0, 1e-2) - exact);
  const double err2 = std::abs(nn::central_difference(cube, 2.0, 5e-3) - exact);
  CHECK(err2 < err1 / 3.0);  // exactly 4x for a cubic, modulo roundoff
}

TEST_CASE("analytic gradients agree with finite differences on both schemes") {
  rng::Stream stream(77);
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    auto cfg = tiny_config(100 + static_cast<std::uint64_t>(trial), 8);
    cfg.num_layers = 1 + trial % 2;
    const auto params = nn::init_params(cfg);

    const bool ours = trial % 2 == 0;
    const loss::LossSpec spec =
        ours ? loss::LossSpec::Ours(2.0, 1.0) : loss::LossSpec::Default();
    std::vector<nn::LabeledExample> batch;
    for (int b = 0; b < 2; ++b) {
      nn::LabeledExample ex;
      ex.seq = random_seq(stream, cfg);
      ex.labels = random_labels(stream, ex.seq, spec.scheme);
      batch.push_back(std::move(ex));
    }

    const auto [value, analytic] = nn::loss_and_grads(params, batch, spec);
    CHECK(std::isfinite(value));
    const auto numeric = nn::finite_diff_grads(params, batch, spec, 1e-4);
    worst = std::max(worst, max_relative_error(analytic, numeric));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("loss_and_grads averages over the batch") {
  const auto cfg = tiny_config(9, 8);
  const auto params = nn::init_params(cfg);
  rng::Stream stream(10);

  nn::LabeledExample ex;
  ex.seq = random_seq(stream, cfg);
  ex.labels = random_labels(stream, ex.seq, loss::Scheme::kDefault);

  const auto [single, g1] = nn::loss_and_grads(params, {ex}, loss::LossSpec::Default());
  const auto [doubled, g2] = nn::loss_and_grads(params, {ex, ex}, loss::LossSpec::Default());
  CHECK(single == doctest::Approx(doubled).epsilon(1e-12));
  CHECK(g1.tok_embed.isApprox(g2.tok_embed, 1e-12));
}
