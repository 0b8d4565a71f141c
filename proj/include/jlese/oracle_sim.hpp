#pragma once

#include <array>
#include <cstdint>

#include "jlese/mean_variance.hpp"
#include "jlese/model_core.hpp"

namespace jlese {

/// xoshiro256** seeded from splitmix64. Specified bit-for-bit so simulation
/// output is reproducible in any language:
///   state[i] = splitmix64 outputs 1..4 starting from `seed`
///   uniform  = (next() >> 11) * 2^-53
class Xoshiro256 {
public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Advances the state by 2^128 draws; used to give each trial block a
  /// disjoint stream.
  void jump();

  const std::array<std::uint64_t, 4>& state() const { return s_; }

private:
  std::array<std::uint64_t, 4> s_{};
};

struct SimConfig {
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 42;
  /// Worker threads; 0 picks the hardware concurrency. Results do not depend
  /// on this value.
  unsigned threads = 0;

  void validate() const;
};

struct SimResult {
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;  // population variance (divide by trials)
  double std_error_mean = 0.0;      // sqrt(variance / trials)
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  bool operator==(const SimResult&) const = default;
};

/// Trials are cut into blocks of this many; block b draws from the seed's
/// generator after b jumps.
inline constexpr std::uint64_t kSimBlockTrials = 1u << 16;

/// Monte Carlo estimate of member 1's profit moments. Each trial draws n
/// success indicators (member 1 first, then peers 2..n) and applies the
/// sharing rule: 0 on own failure, otherwise pY - w - k(w - pYlow)/(n - k)
/// with k failed peers.
SimResult simulate_member_profit(double e, const GroupSpec& group, double repayment,
                                 const MarketParams& params, const SimConfig& cfg);

/// Exact moments by enumerating the n+1 outcomes.
Moments enumerate_member_profit(double e, const GroupSpec& group, double repayment,
                                const MarketParams& params);

}  // namespace jlese
