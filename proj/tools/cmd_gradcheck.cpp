#include <cmath>
#include <iostream>
#include <memory>

#include "commands.hpp"
#include "eqakit/encoder.hpp"
#include "eqakit/errors.hpp"
#include "eqakit/rng.hpp"

namespace eqa::cli {

namespace {

struct GradcheckArgs {
  std::size_t n = 16;
  std::size_t trials = 50;
  double eps = 1e-4;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

text::TokenizedSequence random_sequence(rng::Stream& stream, const nn::ModelConfig& cfg) {
  text::TokenizedSequence seq;
  seq.n = cfg.max_len;
  seq.tokens.assign(cfg.max_len, text::Vocabulary::kPad);
  seq.surface.assign(cfg.max_len, "");
  seq.char_spans.assign(cfg.max_len,
                        text::CharSpan{text::kNoSpanMarker, text::kNoSpanMarker});
  const std::size_t q_len = 1 + stream.next_index(3);
  const std::size_t c_len = 1 + stream.next_index(cfg.max_len - q_len - 3);
  seq.tokens[0] = text::Vocabulary::kCls;
  for (std::size_t i = 0; i < q_len; ++i) {
    seq.tokens[1 + i] =
        static_cast<std::int32_t>(4 + stream.next_index(cfg.vocab_size - 4));
  }
  seq.sep_index = 1 + q_len;
  seq.tokens[seq.sep_index] = text::Vocabulary::kSep;
  seq.context_start = seq.sep_index + 1;
  seq.context_len = c_len;
  for (std::size_t i = 0; i < c_len; ++i) {
    seq.tokens[seq.context_start + i] =
        static_cast<std::int32_t>(4 + stream.next_index(cfg.vocab_size - 4));
  }
  return seq;
}

double worst_relative_error(const nn::Gradients& analytic, const nn::Gradients& numeric) {
  double worst = 0.0;
  std::vector<const Eigen::MatrixXd*> nt;
  nn::for_each_tensor(numeric, [&nt](const std::string&, const Eigen::MatrixXd& m) {
    nt.push_back(&m);
  });
  std::size_t slot = 0;
  nn::for_each_tensor(analytic, [&](const std::string&, const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd& f = *nt[slot++];
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double denom = std::max({std::abs(a(r, c)), std::abs(f(r, c)), 1e-2});
        worst = std::max(worst, std::abs(a(r, c) - f(r, c)) / denom);
      }
    }
  });
  return worst;
}

void run(const GradcheckArgs& args) {
  if (args.n < 6) throw UsageError("--n must be at least 6");
  rng::Stream stream(args.seed);
  double worst = 0.0;

  for (std::size_t trial = 0; trial < args.trials; ++trial) {
    nn::ModelConfig cfg;
    cfg.vocab_size = 24;
    cfg.embed_dim = 8;
    cfg.num_layers = 1 + trial % 2;
    cfg.num_heads = 2;
    cfg.ffn_dim = 16;
    cfg.max_len = args.n;
    cfg.seed = args.seed + trial;
    const nn::ModelParams params = nn::init_params(cfg);

    const bool ours = trial % 2 == 0;
    const loss::LossSpec spec =
        ours ? loss::LossSpec::Ours(2.0, 1.0) : loss::LossSpec::Default();

    nn::LabeledExample ex;
    ex.seq = random_sequence(stream, cfg);
    std::vector<text::TokenSpan> spans;
    if (stream.next_unit() < 0.6) {
      const std::size_t first = ex.seq.context_start + stream.next_index(ex.seq.context_len);
      const std::size_t last =
          first + stream.next_index(ex.seq.context_start + ex.seq.context_len - first);
      spans.push_back({first, last});
    }
    ex.labels = loss::build_labels(ex.seq, spans, spec.scheme);
    const std::vector<nn::LabeledExample> batch{std::move(ex)};

    const auto [value, analytic] = nn::loss_and_grads(params, batch, spec);
    const nn::Gradients numeric = nn::finite_diff_grads(params, batch, spec, args.eps);
    worst = std::max(worst, worst_relative_error(analytic, numeric));
  }

  const bool pass = worst < args.tolerance;
  std::cout << "gradcheck: " << args.trials << " trials at n=" << args.n
            << ", eps=" << args.eps << "\n"
            << "max relative error = " << worst << "\n"
            << (pass ? "PASS" : "FAIL") << " (tolerance " << args.tolerance << ")"
            << std::endl;
  if (!pass) throw eqa::Error("gradient check failed");
}

}  // namespace

void register_gradcheck(CLI::App& app) {
  auto args = std::make_shared<GradcheckArgs>();
  CLI::App* cmd = app.add_subcommand(
      "gradcheck", "Compare analytic gradients against central finite differences");
  cmd->add_option("--n", args->n, "sequence length")->capture_default_str();
  cmd->add_option("--trials", args->trials, "random instances")->capture_default_str();
  cmd->add_option("--eps", args->eps, "finite-difference step")->capture_default_str();
  cmd->add_option("--tolerance", args->tolerance, "max relative error to pass")
      ->capture_default_str();
  cmd->add_option("--seed", args->seed)->capture_default_str();
  cmd->callback([args]() { run(*args); });
}

}  // namespace eqa::cli
