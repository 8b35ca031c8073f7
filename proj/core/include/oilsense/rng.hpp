#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace oilsense {

// FNV-1a 64-bit hash; used for config/dataset fingerprints and seed derivation.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// splitmix64: tiny, well-mixed generator used both as the toolchain's random
// stream and as the mixer for hierarchical seed derivation.
struct SplitMix64 {
  std::uint64_t state = 0;

  constexpr std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
};

// Deterministic random stream with the handful of draws the toolchain needs.
// Gaussian variates use Box-Muller on two fresh 64-bit draws (no caching) so
// the stream state is a pure function of the draw count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_{seed} {}

  std::uint64_t next_u64() { return engine_.next(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_.next() >> 11) * 0x1.0p-53;
  }

  double gaussian(double sigma);

  // unbiased integer in [0, n); n must be > 0
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates shuffle (descending), deterministic for a fixed seed
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  SplitMix64 engine_;
};

// Hierarchical seed derivation: every stage (dataset trace, forest tree,
// one-vs-rest SVM task, split shuffle, ...) gets an independent stream from
// the master seed plus a stable tag, so parallel scheduling can never change
// results.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index);

}  // namespace oilsense
