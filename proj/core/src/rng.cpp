#include "oilsense/rng.hpp"

#include <cmath>
#include <numbers>

#include "oilsense/common.hpp"

namespace oilsense {

double Rng::gaussian(double sigma) {
  // Two fresh draws per variate; 1-u keeps the log argument in (0, 1].
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw NumericError("Rng::below called with n = 0");
  // Classic rejection: discard the biased low range of the 64-bit stream.
  std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
  std::uint64_t h = fnv1a64(tag);
  SplitMix64 mixer{master ^ h};
  return mixer.next();
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index) {
  std::uint64_t h = fnv1a64(tag);
  SplitMix64 mixer{master ^ h};
  std::uint64_t base = mixer.next();
  SplitMix64 leaf{base + index};
  return leaf.next();
}

}  // namespace oilsense
