#include "jlese/oracle_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <thread>
#include <vector>

#include "jlese/errors.hpp"

namespace jlese {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// counts[k] = trials where member 1 succeeded with k failed peers;
// counts[n] = trials where member 1 failed.
using Counts = std::vector<std::uint64_t>;

void run_block(Xoshiro256 rng, std::uint64_t trials, double e, int n, Counts& counts) {
  for (std::uint64_t t = 0; t < trials; ++t) {
    const bool self_ok = rng.uniform() < e;
    int failed_peers = 0;
    for (int j = 1; j < n; ++j) {
      if (!(rng.uniform() < e)) ++failed_peers;
    }
    ++counts[self_ok ? failed_peers : n];
  }
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

void Xoshiro256::jump() {
  static constexpr std::uint64_t kJump[] = {0x180ec6d33cfd0abaULL, 0xd5a61266f0c9392cULL,
                                            0xa9582618e03fc9aaULL, 0x39abdc4529b1661cULL};
  std::array<std::uint64_t, 4> acc{};
  for (std::uint64_t word : kJump) {
    for (int b = 0; b < 64; ++b) {
      if (word & (std::uint64_t{1} << b)) {
        for (int i = 0; i < 4; ++i) acc[i] ^= s_[i];
      }
      next();
    }
  }
  s_ = acc;
}

void SimConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
}

SimResult simulate_member_profit(double e, const GroupSpec& group, double repayment,
                                 const MarketParams& params, const SimConfig& cfg) {
  detail::require_probability(e, "simulate_member_profit");
  group.validate();
  cfg.validate();
  const int n = group.size;

  const std::uint64_t blocks = (cfg.trials + kSimBlockTrials - 1) / kSimBlockTrials;
  unsigned workers = cfg.threads != 0 ? cfg.threads : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, blocks));

  std::vector<Counts> partial(workers, Counts(static_cast<std::size_t>(n) + 1, 0));
  {
    // Worker w owns blocks w, w + workers, ...; integer counts make the
    // recombination exact regardless of the split.
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        Xoshiro256 rng(cfg.seed);
        for (unsigned j = 0; j < w; ++j) rng.jump();
        for (std::uint64_t block = w; block < blocks; block += workers) {
          const std::uint64_t begin = block * kSimBlockTrials;
          const std::uint64_t len = std::min(kSimBlockTrials, cfg.trials - begin);
          run_block(rng, len, e, n, partial[w]);
          for (unsigned j = 0; j < workers; ++j) rng.jump();
        }
      });
    }
  }

  Counts counts(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];
  }

  const double shortfall = repayment - params.low_income();
  std::vector<double> profit(counts.size(), 0.0);
  for (int k = 0; k < n; ++k) {
    profit[k] = params.high_income() - repayment - k * shortfall / static_cast<double>(n - k);
  }

  const double total = static_cast<double>(cfg.trials);
  double sum = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) sum += static_cast<double>(counts[i]) * profit[i];
  const double mean = sum / total;
  double ss = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double d = profit[i] - mean;
    ss += static_cast<double>(counts[i]) * d * d;
  }
  const double variance = ss / total;
  return {mean, variance, std::sqrt(variance / total), cfg.trials, cfg.seed};
}

Moments enumerate_member_profit(double e, const GroupSpec& group, double repayment,
                                const MarketParams& params) {
  group.validate();
  const auto dist = profit_distribution_group(e, group.size, repayment, params);
  return {dist.mean(), dist.variance()};
}

}  // namespace jlese
