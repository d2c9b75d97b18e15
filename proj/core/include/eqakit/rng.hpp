#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace eqa::rng {

// FNV-1a over arbitrary bytes. Also used for checkpoint checksums.
std::uint64_t fnv1a(std::string_view bytes);

// SplitMix64 step; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic random stream. mt19937_64 is fully specified by the
// standard; all draws below are hand-rolled from raw 64-bit outputs so
// results do not depend on the standard library's distribution code.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  // Per-example substream: same (seed, key) always yields the same stream,
  // independent of processing order.
  static Stream for_key(std::uint64_t seed, std::string_view key);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_real(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::size_t next_index(std::size_t bound) {
    return static_cast<std::size_t>(engine_() % bound);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (items.size() < 2) return;
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::swap(items[i], items[next_index(i + 1)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eqa::rng
