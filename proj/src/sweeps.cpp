#include "jlese/sweeps.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>

#include "jlese/errors.hpp"

namespace jlese::sweeps {

namespace {

// Evaluates fn(i) for i in [0, count) on a small thread pool. Results keep
// index order; the lowest-index exception is rethrown.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t count, Fn fn) {
  std::vector<std::optional<T>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(hw, count));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

void require_nonempty(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ConfigError(std::string(what) + " grid is empty");
}

ScoreLink link_from(double slope, double baseline) {
  ScoreLink link{slope < 0.0 ? (1.0 - baseline) / 100.0 : slope, baseline};
  return link;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
  const std::string t = strip(text);
  if (t.empty()) throw ConfigError("grid is empty");

  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(strip(part));
    const auto start = parts.size() == 3 ? to_double(parts[0]) : std::nullopt;
    const auto stop = parts.size() == 3 ? to_double(parts[1]) : std::nullopt;
    const auto step = parts.size() == 3 ? to_double(parts[2]) : std::nullopt;
    if (!start || !stop || !step || !(*step > 0.0) || *stop < *start) {
      throw ConfigError("malformed range grid '" + t + "', expected start:stop:step");
    }
    const auto count = static_cast<long>(std::floor((*stop - *start) / *step + 1e-9)) + 1;
    if (count > 1'000'000) throw ConfigError("range grid '" + t + "' is too large");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) out.push_back(*start + static_cast<double>(i) * *step);
    return out;
  }

  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_double(strip(item));
    if (!v) throw ConfigError("malformed grid value '" + strip(item) + "' in '" + t + "'");
    out.push_back(*v);
  }
  if (t.back() == ',') throw ConfigError("malformed grid '" + t + "'");
  return out;
}

std::vector<CeilingRow> ceilings(const MarketParams& params, std::span<const double> e_grid) {
  params.validate();
  if (e_grid.empty()) throw ConfigError("e grid is empty");
  for (double e : e_grid) {
    if (!(e > 0.0 && e <= 1.0)) {
      throw ConfigError("e grid values must lie in (0, 1], got " + std::to_string(e));
    }
  }
  std::vector<CeilingRow> rows;
  rows.reserve(e_grid.size());
  for (double e : e_grid) {
    rows.push_back({e, loan_ceiling_affordability(e, params), loan_ceiling_incentive(e, params)});
  }
  return rows;
}

std::vector<GroupSizeRow> group_size(int n_min, int n_max, const MarketParams& params,
                                     const CostModel& cost, const ScoreLink& link,
                                     const SolverConfig& cfg) {
  params.validate();
  cost.validate();
  link.validate();
  cfg.validate();
  if (n_min < 1 || n_max < n_min) {
    throw ConfigError("group size range must satisfy 1 <= n-min <= n-max");
  }
  const double limit = ese_limit(params, cost, link).score;
  const auto count = static_cast<std::size_t>(n_max - n_min + 1);
  return parallel_map<GroupSizeRow>(count, [&](std::size_t i) {
    const int n = n_min + static_cast<int>(i);
    try {
      return GroupSizeRow{n, optimal_ese_group(GroupSpec{n}, params, cost, link, cfg), limit};
    } catch (const SolverError& ex) {
      throw SolverError("n=" + std::to_string(n) + ": " + ex.what(), ex.bracket_lo,
                        ex.bracket_hi);
    }
  });
}

std::vector<double> default_gamma_grid() { return parse_grid("0:1:0.05"); }

ScoreLink MvSweepSpec::link_for(double baseline) const { return link_from(slope, baseline); }

void MvSweepSpec::validate() const {
  market.validate();
  require_nonempty(baselines, "b");
  require_nonempty(costs, "c");
  require_nonempty(gammas, "gamma");
  for (double b : baselines) link_for(b).validate();
  for (double c : costs) CostModel{c}.validate();
  for (double g : gammas) RiskPreference{g}.validate();
  if (mode == RepaymentMode::kExogenous && !(std::isfinite(repayment) && repayment > 0.0)) {
    throw ConfigError("repayment w must be > 0");
  }
}

std::vector<MvRow> mean_variance(const MvSweepSpec& spec, const SolverConfig& cfg) {
  spec.validate();
  cfg.validate();
  const std::size_t nc = spec.costs.size(), ng = spec.gammas.size();
  const std::size_t count = spec.baselines.size() * nc * ng;
  return parallel_map<MvRow>(count, [&](std::size_t i) {
    const double b = spec.baselines[i / (nc * ng)];
    const double c = spec.costs[(i / ng) % nc];
    const double g = spec.gammas[i % ng];
    return MvRow{b, c, g,
                 optimal_ese_mv(spec.repayment, spec.market, RiskPreference{g}, CostModel{c},
                                spec.link_for(b), cfg, spec.mode)};
  });
}

std::string YieldScenario::label() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "Ybar=%.10g,Ylow=%.10g", y_high, y_low);
  return buf;
}

void YieldSweepSpec::validate() const {
  if (scenarios.empty()) throw ConfigError("no yield scenarios given");
  require_nonempty(gammas, "gamma");
  for (const auto& s : scenarios) {
    MarketParams m = market;
    m.y_high = s.y_high;
    m.y_low = s.y_low;
    m.validate();
  }
  link_from(slope, baseline).validate();
  CostModel{cost}.validate();
  for (double g : gammas) RiskPreference{g}.validate();
  if (mode == RepaymentMode::kExogenous && !(std::isfinite(repayment) && repayment > 0.0)) {
    throw ConfigError("repayment w must be > 0");
  }
}

std::vector<YieldRow> yields(const YieldSweepSpec& spec, const SolverConfig& cfg) {
  spec.validate();
  cfg.validate();
  const std::size_t ng = spec.gammas.size();
  const ScoreLink link = link_from(spec.slope, spec.baseline);
  return parallel_map<YieldRow>(spec.scenarios.size() * ng, [&](std::size_t i) {
    const auto& s = spec.scenarios[i / ng];
    MarketParams m = spec.market;
    m.y_high = s.y_high;
    m.y_low = s.y_low;
    const double g = spec.gammas[i % ng];
    return YieldRow{s.label(), g,
                    optimal_ese_mv(spec.repayment, m, RiskPreference{g}, CostModel{spec.cost},
                                   link, cfg, spec.mode)};
  });
}

std::vector<SimRow> simulate(std::span<const double> e_grid, std::span<const int> n_grid,
                             double repayment, const MarketParams& params,
                             const SimConfig& cfg) {
  params.validate();
  cfg.validate();
  if (e_grid.empty() || n_grid.empty()) throw ConfigError("simulation grid is empty");
  for (double e : e_grid) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("e must lie in [0, 1]");
    if (repayment < 0.0 && e == 0.0) {
      throw ConfigError("e = 0 has no binding repayment; pass --w explicitly");
    }
  }
  for (int n : n_grid) {
    if (n < 1 || n > 1000) throw ConfigError("n must lie in [1, 1000]");
  }

  std::vector<SimRow> rows;
  for (double e : e_grid) {
    for (int n : n_grid) {
      const GroupSpec group{n};
      const double w = repayment < 0.0 ? binding_repayment(e, n, params).repayment : repayment;
      const auto sim = simulate_member_profit(e, group, w, params, cfg);
      const auto exact = enumerate_member_profit(e, group, w, params);
      const double diff = sim.empirical_mean - exact.mean;
      double z = 0.0;
      if (sim.std_error_mean > 0.0) {
        z = diff / sim.std_error_mean;
      } else if (diff != 0.0) {
        z = diff > 0.0 ? INFINITY : -INFINITY;
      }
      rows.push_back({e, n, w, sim, exact, z});
    }
  }
  return rows;
}

}  // namespace jlese::sweeps
