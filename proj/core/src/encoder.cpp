#include "eqakit/encoder.hpp"

#include <cmath>
#include <limits>

#include "eqakit/errors.hpp"
#include "eqakit/rng.hpp"

namespace eqa::nn {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double kInvSqrt2 = 0.7071067811865476;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
  const double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;  // 1/sqrt(2*pi)
  return cdf + x * pdf;
}

void add_row_bias(Eigen::MatrixXd& m, const Eigen::MatrixXd& bias) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c).array() += bias(c, 0);
}

struct LnCache {
  Eigen::MatrixXd normed;    // x-hat, n x d
  Eigen::VectorXd inv_std;   // n
};

Eigen::MatrixXd layer_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& gain,
                           const Eigen::MatrixXd& bias, LnCache& cache) {
  const Eigen::Index n = x.rows(), d = x.cols();
  cache.normed.resize(n, d);
  cache.inv_std.resize(n);
  Eigen::MatrixXd out(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.row(i).mean();
    const double var = (x.row(i).array() - mu).square().mean();
    const double inv_std = 1.0 / std::sqrt(var + kLnEps);
    cache.inv_std[i] = inv_std;
    cache.normed.row(i) = (x.row(i).array() - mu) * inv_std;
    out.row(i) = (cache.normed.row(i).array() * gain.col(0).transpose().array() +
                  bias.col(0).transpose().array())
                     .matrix();
  }
  return out;
}

// Accumulates dx and the gain/bias gradients from dy.
Eigen::MatrixXd layer_norm_backward(const Eigen::MatrixXd& dy, const LnCache& cache,
                                    const Eigen::MatrixXd& gain, Eigen::MatrixXd& g_gain,
                                    Eigen::MatrixXd& g_bias) {
  const Eigen::Index n = dy.rows(), d = dy.cols();
  Eigen::MatrixXd dx(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xhat = cache.normed.row(i).array();
    const Eigen::ArrayXd t = dy.row(i).transpose().array() * gain.col(0).array();
    const double mean_t = t.mean();
    const double mean_tx = (t * xhat.transpose()).mean();
    dx.row(i) = (cache.inv_std[i] * (t - mean_t - xhat.transpose() * mean_tx))
                    .matrix()
                    .transpose();
    g_gain.col(0).array() += dy.row(i).transpose().array() * xhat.transpose();
    g_bias.col(0).array() += dy.row(i).transpose().array();
  }
  return dx;
}

struct LayerCache {
  Eigen::MatrixXd x_in;                 // block input, n x d
  LnCache ln1;
  Eigen::MatrixXd ln1_out;              // n x d
  Eigen::MatrixXd q, k, v;              // n x d
  std::vector<Eigen::MatrixXd> attn;    // per head, n x n
  Eigen::MatrixXd heads;                // concatenated head outputs, n x d
  Eigen::MatrixXd h1;                   // after attention residual
  LnCache ln2;
  Eigen::MatrixXd ln2_out;
  Eigen::MatrixXd ffn_pre;              // n x ffn
  Eigen::MatrixXd ffn_act;              // gelu(ffn_pre)
};

struct ForwardCache {
  Eigen::MatrixXd x0;  // embeddings, n x d
  std::vector<LayerCache> layers;
  LnCache lnf;
  Eigen::MatrixXd x_final;  // n x d
  std::vector<std::uint8_t> attend_mask;  // 1 = real (non-pad) token
};

// Pads are identified structurally (everything after the kept context), so
// the token id stored at a pad position can never leak into other logits.
std::vector<std::uint8_t> attendable(const text::TokenizedSequence& seq) {
  std::vector<std::uint8_t> mask(seq.n, 0);
  const std::size_t content_end = seq.context_start + seq.context_len;
  for (std::size_t k = 0; k < content_end && k < seq.n; ++k) mask[k] = 1;
  return mask;
}

HeadLogits run_forward(const ModelParams& params, const text::TokenizedSequence& seq,
                       ForwardCache* cache) {
  const ModelConfig& cfg = params.config;
  if (seq.n != cfg.max_len) {
    throw ShapeMismatch("sequence length " + std::to_string(seq.n) +
                        " != configured max_len " + std::to_string(cfg.max_len));
  }
  const auto n = static_cast<Eigen::Index>(seq.n);
  const auto d = static_cast<Eigen::Index>(cfg.embed_dim);
  const auto heads = static_cast<Eigen::Index>(cfg.num_heads);
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Eigen::MatrixXd x(n, d);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const std::int32_t id = seq.tokens[static_cast<std::size_t>(pos)];
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw ShapeMismatch("token id " + std::to_string(id) +
                          " outside vocabulary of size " + std::to_string(cfg.vocab_size));
    }
    x.row(pos) = params.tok_embed.row(id) + params.pos_embed.row(pos);
  }

  const std::vector<std::uint8_t> attend = attendable(seq);
  if (cache) {
    cache->x0 = x;
    cache->attend_mask = attend;
    cache->layers.resize(params.layers.size());
  }

  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const LayerParams& lp = params.layers[li];
    LayerCache local;
    LayerCache& lc = cache ? cache->layers[li] : local;
    lc.x_in = x;

    lc.ln1_out = layer_norm(x, lp.ln1_gain, lp.ln1_bias, lc.ln1);
    lc.q = lc.ln1_out * lp.wq;
    add_row_bias(lc.q, lp.bq);
    lc.k = lc.ln1_out * lp.wk;
    add_row_bias(lc.k, lp.bk);
    lc.v = lc.ln1_out * lp.wv;
    add_row_bias(lc.v, lp.bv);

    lc.attn.assign(static_cast<std::size_t>(heads), Eigen::MatrixXd());
    lc.heads.resize(n, d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      Eigen::MatrixXd scores =
          scale * (lc.q.middleCols(h * dh, dh) * lc.k.middleCols(h * dh, dh).transpose());
      for (Eigen::Index j = 0; j < n; ++j) {
        if (!attend[static_cast<std::size_t>(j)]) scores.col(j).setConstant(-kInf);
      }
      // Row softmax; masked keys contribute exactly zero weight.
      Eigen::MatrixXd& a = lc.attn[static_cast<std::size_t>(h)];
      a.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double m = scores.row(i).maxCoeff();
        Eigen::ArrayXd z = (scores.row(i).transpose().array() - m).exp();
        a.row(i) = (z / z.sum()).matrix().transpose();
      }
      lc.heads.middleCols(h * dh, dh).noalias() = a * lc.v.middleCols(h * dh, dh);
    }

    Eigen::MatrixXd attn_out = lc.heads * lp.wo;
    add_row_bias(attn_out, lp.bo);
    lc.h1 = lc.x_in + attn_out;

    lc.ln2_out = layer_norm(lc.h1, lp.ln2_gain, lp.ln2_bias, lc.ln2);
    lc.ffn_pre = lc.ln2_out * lp.w_in;
    add_row_bias(lc.ffn_pre, lp.b_in);
    lc.ffn_act = lc.ffn_pre.unaryExpr([](double p) { return gelu(p); });
    Eigen::MatrixXd ffn_out = lc.ffn_act * lp.w_out;
    add_row_bias(ffn_out, lp.b_out);
    x = lc.h1 + ffn_out;
  }

  LnCache lnf_local;
  LnCache& lnf = cache ? cache->lnf : lnf_local;
  Eigen::MatrixXd x_final = layer_norm(x, params.lnf_gain, params.lnf_bias, lnf);
  if (cache) cache->x_final = x_final;

  HeadLogits out;
  out.s = x_final * params.start_w.col(0);
  out.s.array() += params.start_b(0, 0);
  out.e = x_final * params.end_w.col(0);
  out.e.array() += params.end_b(0, 0);
  out.context_mask.assign(seq.n, 0);
  for (std::size_t k = 0; k < seq.n; ++k) {
    out.context_mask[k] = seq.is_context_token(k) ? 1 : 0;
  }
  return out;
}

// Backpropagates one example's logit gradients into grads.
void run_backward(const ModelParams& params, const text::TokenizedSequence& seq,
                  const ForwardCache& cache, const Eigen::VectorXd& ds,
                  const Eigen::VectorXd& de, Gradients& grads) {
  const ModelConfig& cfg = params.config;
  const auto n = static_cast<Eigen::Index>(seq.n);
  const auto d = static_cast<Eigen::Index>(cfg.embed_dim);
  const auto heads = static_cast<Eigen::Index>(cfg.num_heads);
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  // Heads.
  grads.start_w.col(0).noalias() += cache.x_final.transpose() * ds;
  grads.end_w.col(0).noalias() += cache.x_final.transpose() * de;
  grads.start_b(0, 0) += ds.sum();
  grads.end_b(0, 0) += de.sum();

  Eigen::MatrixXd dx = ds * params.start_w.col(0).transpose() +
                       de * params.end_w.col(0).transpose();  // n x d

  dx = layer_norm_backward(dx, cache.lnf, params.lnf_gain, grads.lnf_gain, grads.lnf_bias);

  for (std::size_t li = params.layers.size(); li-- > 0;) {
    const LayerParams& lp = params.layers[li];
    LayerParams& gl = grads.layers[li];
    const LayerCache& lc = cache.layers[li];

    // FFN block: x_out = h1 + gelu(ln2(h1) W_in + b_in) W_out + b_out.
    Eigen::MatrixXd d_h1 = dx;  // residual path
    Eigen::MatrixXd d_ffn_out = dx;
    gl.w_out.noalias() += lc.ffn_act.transpose() * d_ffn_out;
    gl.b_out.col(0) += d_ffn_out.colwise().sum().transpose();
    Eigen::MatrixXd d_act = d_ffn_out * lp.w_out.transpose();
    Eigen::MatrixXd d_pre =
        (d_act.array() * lc.ffn_pre.unaryExpr([](double p) { return gelu_grad(p); }).array())
            .matrix();
    gl.w_in.noalias() += lc.ln2_out.transpose() * d_pre;
    gl.b_in.col(0) += d_pre.colwise().sum().transpose();
    Eigen::MatrixXd d_ln2_out = d_pre * lp.w_in.transpose();
    d_h1 += layer_norm_backward(d_ln2_out, lc.ln2, lp.ln2_gain, gl.ln2_gain, gl.ln2_bias);

    // Attention block: h1 = x_in + (heads) Wo + bo.
    Eigen::MatrixXd d_x_in = d_h1;  // residual path
    gl.wo.noalias() += lc.heads.transpose() * d_h1;
    gl.bo.col(0) += d_h1.colwise().sum().transpose();
    Eigen::MatrixXd d_heads = d_h1 * lp.wo.transpose();

    Eigen::MatrixXd dq(n, d), dk(n, d), dv(n, d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      const Eigen::MatrixXd& a = lc.attn[static_cast<std::size_t>(h)];
      const auto vh = lc.v.middleCols(h * dh, dh);
      const auto d_oh = d_heads.middleCols(h * dh, dh);
      dv.middleCols(h * dh, dh).noalias() = a.transpose() * d_oh;
      Eigen::MatrixXd d_a = d_oh * vh.transpose();
      // Softmax backward, row-wise: dS = A .* (dA - rowsum(dA .* A)).
      Eigen::VectorXd row_dot = (d_a.array() * a.array()).rowwise().sum();
      Eigen::MatrixXd d_scores =
          (a.array() * (d_a.colwise() - row_dot).array() * scale).matrix();
      dq.middleCols(h * dh, dh).noalias() = d_scores * lc.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh).noalias() = d_scores.transpose() * lc.q.middleCols(h * dh, dh);
    }

    gl.wq.noalias() += lc.ln1_out.transpose() * dq;
    gl.wk.noalias() += lc.ln1_out.transpose() * dk;
    gl.wv.noalias() += lc.ln1_out.transpose() * dv;
    gl.bq.col(0) += dq.colwise().sum().transpose();
    gl.bk.col(0) += dk.colwise().sum().transpose();
    gl.bv.col(0) += dv.colwise().sum().transpose();

    Eigen::MatrixXd d_ln1_out =
        dq * lp.wq.transpose() + dk * lp.wk.transpose() + dv * lp.wv.transpose();
    d_x_in += layer_norm_backward(d_ln1_out, lc.ln1, lp.ln1_gain, gl.ln1_gain, gl.ln1_bias);
    dx = std::move(d_x_in);
  }

  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const std::int32_t id = seq.tokens[static_cast<std::size_t>(pos)];
    grads.tok_embed.row(id) += dx.row(pos);
    grads.pos_embed.row(pos) += dx.row(pos);
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < text::Vocabulary::kNumReserved) {
    throw InvalidConfig("vocab_size must cover the reserved token ids");
  }
  if (embed_dim == 0 || num_layers == 0 || num_heads == 0 || ffn_dim == 0 || max_len == 0) {
    throw InvalidConfig("all model dimensions must be >= 1");
  }
  if (embed_dim % num_heads != 0) {
    throw InvalidConfig("embed_dim " + std::to_string(embed_dim) +
                        " is not divisible by num_heads " + std::to_string(num_heads));
  }
}

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  p.config = cfg;
  const auto d = static_cast<Eigen::Index>(cfg.embed_dim);
  const auto f = static_cast<Eigen::Index>(cfg.ffn_dim);

  p.tok_embed.resize(static_cast<Eigen::Index>(cfg.vocab_size), d);
  p.pos_embed.resize(static_cast<Eigen::Index>(cfg.max_len), d);
  p.layers.resize(cfg.num_layers);
  for (LayerParams& lp : p.layers) {
    lp.wq.resize(d, d);
    lp.wk.resize(d, d);
    lp.wv.resize(d, d);
    lp.wo.resize(d, d);
    lp.bq = Eigen::MatrixXd::Zero(d, 1);
    lp.bk = Eigen::MatrixXd::Zero(d, 1);
    lp.bv = Eigen::MatrixXd::Zero(d, 1);
    lp.bo = Eigen::MatrixXd::Zero(d, 1);
    lp.ln1_gain = Eigen::MatrixXd::Ones(d, 1);
    lp.ln1_bias = Eigen::MatrixXd::Zero(d, 1);
    lp.ln2_gain = Eigen::MatrixXd::Ones(d, 1);
    lp.ln2_bias = Eigen::MatrixXd::Zero(d, 1);
    lp.w_in.resize(d, f);
    lp.b_in = Eigen::MatrixXd::Zero(f, 1);
    lp.w_out.resize(f, d);
    lp.b_out = Eigen::MatrixXd::Zero(d, 1);
  }
  p.lnf_gain = Eigen::MatrixXd::Ones(d, 1);
  p.lnf_bias = Eigen::MatrixXd::Zero(d, 1);
  p.start_w.resize(d, 1);
  p.end_w.resize(d, 1);
  p.start_b = Eigen::MatrixXd::Zero(1, 1);
  p.end_b = Eigen::MatrixXd::Zero(1, 1);

  rng::Stream stream(cfg.seed);
  auto fill_uniform = [&stream](Eigen::MatrixXd& m, double limit) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = stream.next_real(-limit, limit);
    }
  };
  auto xavier = [&fill_uniform](Eigen::MatrixXd& m) {
    fill_uniform(m, std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols())));
  };

  // Embeddings start at unit-ish row variance; layer norm keeps later
  // activations in range either way, and a healthy variance keeps 1/sigma
  // (and its derivatives) moderate.
  fill_uniform(p.tok_embed, 0.5);
  fill_uniform(p.pos_embed, 0.5);
  for (LayerParams& lp : p.layers) {
    xavier(lp.wq);
    xavier(lp.wk);
    xavier(lp.wv);
    xavier(lp.wo);
    xavier(lp.w_in);
    xavier(lp.w_out);
  }
  xavier(p.start_w);
  xavier(p.end_w);
  return p;
}

Gradients zeros_like(const ModelParams& params) {
  Gradients g = params;
  for_each_tensor(g, [](const std::string&, Eigen::MatrixXd& m) { m.setZero(); });
  return g;
}

void for_each_tensor(ModelParams& params,
                     const std::function<void(const std::string&, Eigen::MatrixXd&)>& fn) {
  fn("tok_embed", params.tok_embed);
  fn("pos_embed", params.pos_embed);
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    LayerParams& lp = params.layers[i];
    const std::string prefix = "layer" + std::to_string(i) + ".";
    fn(prefix + "wq", lp.wq);
    fn(prefix + "bq", lp.bq);
    fn(prefix + "wk", lp.wk);
    fn(prefix + "bk", lp.bk);
    fn(prefix + "wv", lp.wv);
    fn(prefix + "bv", lp.bv);
    fn(prefix + "wo", lp.wo);
    fn(prefix + "bo", lp.bo);
    fn(prefix + "ln1_gain", lp.ln1_gain);
    fn(prefix + "ln1_bias", lp.ln1_bias);
    fn(prefix + "w_in", lp.w_in);
    fn(prefix + "b_in", lp.b_in);
    fn(prefix + "w_out", lp.w_out);
    fn(prefix + "b_out", lp.b_out);
    fn(prefix + "ln2_gain", lp.ln2_gain);
    fn(prefix + "ln2_bias", lp.ln2_bias);
  }
  fn("lnf_gain", params.lnf_gain);
  fn("lnf_bias", params.lnf_bias);
  fn("start_w", params.start_w);
  fn("start_b", params.start_b);
  fn("end_w", params.end_w);
  fn("end_b", params.end_b);
}

void for_each_tensor(const ModelParams& params,
                     const std::function<void(const std::string&, const Eigen::MatrixXd&)>& fn) {
  for_each_tensor(const_cast<ModelParams&>(params),
                  [&fn](const std::string& name, Eigen::MatrixXd& m) {
                    fn(name, static_cast<const Eigen::MatrixXd&>(m));
                  });
}

HeadLogits forward(const ModelParams& params, const text::TokenizedSequence& seq) {
  return run_forward(params, seq, nullptr);
}

std::pair<double, Gradients> loss_and_grads(const ModelParams& params,
                                            const std::vector<LabeledExample>& batch,
                                            const loss::LossSpec& spec) {
  if (batch.empty()) throw InvalidConfig("empty batch");
  Gradients grads = zeros_like(params);
  double total = 0.0;
  for (const LabeledExample& ex : batch) {
    if (static_cast<std::size_t>(ex.labels.n()) != ex.seq.n) {
      throw LabelSchemeMismatch("labels built for a different sequence length");
    }
    ForwardCache cache;
    const HeadLogits logits = run_forward(params, ex.seq, &cache);
    const loss::LogitGrads lg = loss::loss_logit_grads(logits.s, logits.e, ex.labels, spec);
    total += lg.value;
    run_backward(params, ex.seq, cache, lg.ds, lg.de, grads);
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for_each_tensor(grads, [inv_b](const std::string&, Eigen::MatrixXd& m) { m *= inv_b; });
  return {total * inv_b, std::move(grads)};
}

double batch_loss(const ModelParams& params, const std::vector<LabeledExample>& batch,
                  const loss::LossSpec& spec) {
  if (batch.empty()) throw InvalidConfig("empty batch");
  double total = 0.0;
  for (const LabeledExample& ex : batch) {
    const HeadLogits logits = forward(params, ex.seq);
    total += loss::loss_value(logits.s, logits.e, ex.labels, spec);
  }
  return total / static_cast<double>(batch.size());
}

Gradients finite_diff_grads(const ModelParams& params,
                            const std::vector<LabeledExample>& batch,
                            const loss::LossSpec& spec, double eps) {
  if (!(eps > 0.0)) throw InvalidConfig("eps must be positive");
  ModelParams probe = params;
  Gradients grads = zeros_like(params);

  std::vector<Eigen::MatrixXd*> probe_tensors;
  for_each_tensor(probe, [&probe_tensors](const std::string&, Eigen::MatrixXd& m) {
    probe_tensors.push_back(&m);
  });
  std::vector<Eigen::MatrixXd*> grad_tensors;
  for_each_tensor(grads, [&grad_tensors](const std::string&, Eigen::MatrixXd& m) {
    grad_tensors.push_back(&m);
  });

  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    Eigen::MatrixXd& m = *probe_tensors[t];
    Eigen::MatrixXd& g = *grad_tensors[t];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double saved = m(r, c);
        m(r, c) = saved + eps;
        const double up = batch_loss(probe, batch, spec);
        m(r, c) = saved - eps;
        const double down = batch_loss(probe, batch, spec);
        m(r, c) = saved;
        g(r, c) = (up - down) / (2.0 * eps);
      }
    }
  }
  return grads;
}

loss::LogitGrads finite_diff_logit_grads(const Eigen::VectorXd& s, const Eigen::VectorXd& e,
                                         const loss::SpanLabels& labels,
                                         const loss::LossSpec& spec, double eps) {
  if (!(eps > 0.0)) throw InvalidConfig("eps must be positive");
  loss::LogitGrads g;
  g.value = loss::loss_value(s, e, labels, spec);
  g.ds.resize(s.size());
  g.de.resize(e.size());
  Eigen::VectorXd sp = s, ep = e;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double saved = sp[k];
    sp[k] = saved + eps;
    const double up = loss::loss_value(sp, ep, labels, spec);
    sp[k] = saved - eps;
    const double down = loss::loss_value(sp, ep, labels, spec);
    sp[k] = saved;
    g.ds[k] = (up - down) / (2.0 * eps);
  }
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    const double saved = ep[k];
    ep[k] = saved + eps;
    const double up = loss::loss_value(sp, ep, labels, spec);
    ep[k] = saved - eps;
    const double down = loss::loss_value(sp, ep, labels, spec);
    ep[k] = saved;
    g.de[k] = (up - down) / (2.0 * eps);
  }
  return g;
}

double central_difference(const std::function<double(double)>& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

}  // namespace eqa::nn
