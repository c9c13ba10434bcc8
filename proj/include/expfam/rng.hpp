#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace expfam {

/// Seed for the library's deterministic random streams. The same seed
/// always produces a bit-identical stream.
struct RngSeed {
  std::uint64_t value = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Derives the seed of an independent substream. Used to split one base
/// seed into per-chunk streams whose outputs do not overlap in practice.
inline RngSeed derive_seed(RngSeed base, std::uint64_t stream_index) {
  std::uint64_t state = base.value ^ (0x8e9e3c6a85ae7fb1ULL * (stream_index + 1));
  (void)detail::splitmix64(state);
  return RngSeed{detail::splitmix64(state)};
}

/// xoshiro256++ generator with splitmix64 seeding, plus the primitive
/// variate transforms shared by the family samplers.
class Rng {
public:
  explicit Rng(RngSeed seed) {
    std::uint64_t state = seed.value;
    for (auto& word : state_) word = detail::splitmix64(state);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform draw in the open interval (0, 1).
  double uniform01() {
    double u;
    do {
      u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    } while (u <= 0.0);
    return u;
  }

  /// Standard normal draw (Marsaglia polar method, spare cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  /// Standard exponential draw.
  double exponential() { return -std::log(uniform01()); }

private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace expfam
