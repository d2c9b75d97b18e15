#include <cstring>
#include <fstream>
#include <vector>

#include "eqakit/errors.hpp"
#include "eqakit/rng.hpp"
#include "eqakit/training.hpp"

// Checkpoint container, version 1.
//
//   "EQKC" | u32 version | model config | train config |
//   u64 tensor count | { u32 name len | name | u64 rows | u64 cols |
//   f64 row-major data } * | u64 fnv1a checksum of all preceding bytes
//
// All integers and doubles are little-endian; doubles round trip
// bit-exactly.

namespace eqa::train {

namespace {

constexpr char kMagic[4] = {'E', 'Q', 'K', 'C'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void raw(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buffer_.insert(buffer_.end(), c, c + n);
  }
  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::uint32_t u32() { return read<std::uint32_t>(); }
  std::uint64_t u64() { return read<std::uint64_t>(); }
  double f64() { return read<double>(); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }
  const std::string& bytes() const { return bytes_; }

 private:
  template <typename T>
  T read() {
    T v;
    raw(&v, sizeof v);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw ChecksumMismatch("checkpoint file is truncated");
    }
  }

  std::string bytes_;
  std::size_t pos_ = 0;
};

void write_configs(Writer& w, const nn::ModelConfig& m, const TrainConfig& cfg) {
  w.u64(m.vocab_size);
  w.u64(m.embed_dim);
  w.u64(m.num_layers);
  w.u64(m.num_heads);
  w.u64(m.ffn_dim);
  w.u64(m.max_len);
  w.u64(m.seed);

  w.u32(cfg.loss.scheme == loss::Scheme::kOurs ? 1 : 0);
  w.f64(cfg.loss.lambda_qa);
  w.f64(cfg.loss.lambda_tag);
  w.u64(cfg.batch_size);
  w.u64(cfg.epochs);
  w.f64(cfg.learning_rate);
  w.f64(cfg.beta1);
  w.f64(cfg.beta2);
  w.f64(cfg.weight_decay);
  w.f64(cfg.adam_eps);
  w.f64(cfg.clip_norm);
  w.u64(cfg.seed);
  w.u64(cfg.max_answer_len);
}

TrainConfig read_configs(Reader& r) {
  TrainConfig cfg;
  cfg.model.vocab_size = r.u64();
  cfg.model.embed_dim = r.u64();
  cfg.model.num_layers = r.u64();
  cfg.model.num_heads = r.u64();
  cfg.model.ffn_dim = r.u64();
  cfg.model.max_len = r.u64();
  cfg.model.seed = r.u64();

  cfg.loss.scheme = r.u32() == 1 ? loss::Scheme::kOurs : loss::Scheme::kDefault;
  cfg.loss.lambda_qa = r.f64();
  cfg.loss.lambda_tag = r.f64();
  cfg.batch_size = r.u64();
  cfg.epochs = r.u64();
  cfg.learning_rate = r.f64();
  cfg.beta1 = r.f64();
  cfg.beta2 = r.f64();
  cfg.weight_decay = r.f64();
  cfg.adam_eps = r.f64();
  cfg.clip_norm = r.f64();
  cfg.seed = r.u64();
  cfg.max_answer_len = r.u64();
  return cfg;
}

}  // namespace

void save_checkpoint(const nn::ModelParams& params, const TrainConfig& cfg,
                     const text::Vocabulary& vocab, const std::string& path) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kVersion);
  write_configs(w, params.config, cfg);

  w.u64(vocab.surfaces().size());
  for (const std::string& surface : vocab.surfaces()) w.str(surface);

  std::size_t count = 0;
  nn::for_each_tensor(params,
                      [&count](const std::string&, const Eigen::MatrixXd&) { ++count; });
  w.u64(count);
  nn::for_each_tensor(params, [&w](const std::string& name, const Eigen::MatrixXd& m) {
    w.str(name);
    w.u64(static_cast<std::uint64_t>(m.rows()));
    w.u64(static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
    }
  });

  const std::uint64_t checksum = rng::fnv1a(w.buffer());
  Writer trailer = std::move(w);
  trailer.u64(checksum);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoFailure("cannot open checkpoint for writing: " + path);
  out.write(trailer.buffer().data(), static_cast<std::streamsize>(trailer.buffer().size()));
  if (!out) throw IoFailure("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < sizeof kMagic + sizeof(std::uint32_t) + sizeof(std::uint64_t)) {
    throw ChecksumMismatch("checkpoint file is truncated");
  }
  const std::string payload = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + payload.size(), sizeof stored);
  if (rng::fnv1a(payload) != stored) {
    throw ChecksumMismatch("checkpoint checksum does not match its contents");
  }

  Reader r(payload);
  char magic[4];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw MalformedFile("not a checkpoint file: " + path);
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw VersionMismatch(version, kVersion,
                          "checkpoint version " + std::to_string(version) +
                              "; this build reads version " + std::to_string(kVersion));
  }

  TrainConfig cfg = read_configs(r);

  const std::uint64_t n_surfaces = r.u64();
  std::vector<std::string> surfaces;
  surfaces.reserve(n_surfaces);
  for (std::uint64_t i = 0; i < n_surfaces; ++i) surfaces.push_back(r.str());
  text::Vocabulary vocab(surfaces);

  nn::ModelParams params = nn::init_params(cfg.model);

  const std::uint64_t count = r.u64();
  std::size_t expected = 0;
  nn::for_each_tensor(params,
                      [&expected](const std::string&, const Eigen::MatrixXd&) { ++expected; });
  if (count != expected) {
    throw MalformedFile("checkpoint holds " + std::to_string(count) + " tensors; expected " +
                        std::to_string(expected));
  }
  nn::for_each_tensor(params, [&r](const std::string& name, Eigen::MatrixXd& m) {
    const std::string stored_name = r.str();
    if (stored_name != name) {
      throw MalformedFile("checkpoint tensor '" + stored_name + "' where '" + name +
                          "' was expected");
    }
    const auto rows = static_cast<Eigen::Index>(r.u64());
    const auto cols = static_cast<Eigen::Index>(r.u64());
    if (rows != m.rows() || cols != m.cols()) {
      throw MalformedFile("checkpoint tensor '" + name + "' has an unexpected shape");
    }
    for (Eigen::Index row = 0; row < rows; ++row) {
      for (Eigen::Index col = 0; col < cols; ++col) m(row, col) = r.f64();
    }
  });
  return Checkpoint{std::move(params), cfg, std::move(vocab)};
}

}  // namespace eqa::train
