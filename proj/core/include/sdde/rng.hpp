#pragma once

#include <cmath>
#include <cstdint>

namespace sdde {

// Counter-based (stateless) random numbers. Every draw is a pure function of
// its key, so any sub-stream can be regenerated without producing the rest.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix4(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                          std::uint64_t d) {
  std::uint64_t h = splitmix64(a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  h = splitmix64(h ^ d);
  return h;
}

// uniform in (0,1]; never returns 0 so log() below is safe
inline double unit_open(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

// uniform in [0,1)
inline double unit_half_open(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Standard normal draw keyed by (seed, counter, stream). Box-Muller on two
/// hashed uniforms.
inline double counter_gauss(std::uint64_t seed, std::int64_t counter,
                            std::uint64_t stream) {
  const auto c = static_cast<std::uint64_t>(counter);
  const double u1 = detail::unit_open(detail::mix4(seed, c, stream, 0x6a09e667f3bcc908ULL));
  const double u2 = detail::unit_half_open(detail::mix4(seed, c, stream, 0xbb67ae8584caa73bULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Uniform in [0,1) keyed the same way.
inline double counter_uniform(std::uint64_t seed, std::int64_t counter,
                              std::uint64_t stream) {
  const auto c = static_cast<std::uint64_t>(counter);
  return detail::unit_half_open(detail::mix4(seed, c, stream, 0x3c6ef372fe94f82bULL));
}

/// Small sequential generator for samplers (rejection sampling etc.).
/// Deterministic given the seed; not meant for the Brownian increments,
/// which use the counter-based functions above.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(detail::splitmix64(seed ^ 0xa54ff53a5f1d36f1ULL)) {}

  std::uint64_t next_u64() {
    state_ = detail::splitmix64(state_);
    return state_;
  }
  double uniform() { return detail::unit_half_open(next_u64()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gauss() {
    const double u1 = detail::unit_open(next_u64());
    const double u2 = detail::unit_half_open(next_u64());
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }
  double exponential(double scale) { return -scale * std::log(detail::unit_open(next_u64())); }
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

private:
  std::uint64_t state_;
};

}  // namespace sdde
