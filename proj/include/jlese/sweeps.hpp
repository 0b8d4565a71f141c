#pragma once

// Parameter sweeps behind the CLI subcommands. Each returns its rows in
// deterministic grid order; evaluation runs in parallel.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "jlese/mean_variance.hpp"
#include "jlese/model_core.hpp"
#include "jlese/optimizer.hpp"
#include "jlese/oracle_sim.hpp"

namespace jlese::sweeps {

/// Parses "a,b,c" or "start:stop:step" (inclusive of stop within 1e-9 of a
/// step). Throws ConfigError on an empty or malformed grid.
std::vector<double> parse_grid(const std::string& text);

struct CeilingRow {
  double e;
  double affordability;  // L1
  double incentive;      // L2, the binding ceiling
};
std::vector<CeilingRow> ceilings(const MarketParams& params, std::span<const double> e_grid);

struct GroupSizeRow {
  int n;
  Optimum optimum;
  double limit;
};
std::vector<GroupSizeRow> group_size(int n_min, int n_max, const MarketParams& params,
                                     const CostModel& cost, const ScoreLink& link,
                                     const SolverConfig& cfg = {});

struct MvSweepSpec {
  MarketParams market;
  std::vector<double> baselines{0.3, 0.5, 0.7};
  std::vector<double> costs{800, 1000, 1200, 1500, 2000};
  std::vector<double> gammas;  // defaults to 0, 0.05, ..., 1
  double slope = -1.0;         // < 0: k = (1 - b) / 100 per baseline
  double repayment = 140.0;
  RepaymentMode mode = RepaymentMode::kExogenous;

  ScoreLink link_for(double baseline) const;
  void validate() const;
};

/// Default risk-aversion grid {0, 0.05, ..., 1}.
std::vector<double> default_gamma_grid();

struct MvRow {
  double baseline;
  double cost;
  double gamma;
  Optimum optimum;
};
/// Rows ordered by (baseline, cost, gamma).
std::vector<MvRow> mean_variance(const MvSweepSpec& spec, const SolverConfig& cfg = {});

struct YieldScenario {
  double y_high;
  double y_low;
  std::string label() const;
};

struct YieldSweepSpec {
  MarketParams market;
  std::vector<YieldScenario> scenarios{{1000, 500}, {600, 300}};
  std::vector<double> gammas;
  double baseline = 0.5;
  double cost = 1000.0;
  double slope = -1.0;
  double repayment = 140.0;
  RepaymentMode mode = RepaymentMode::kExogenous;

  void validate() const;
};

struct YieldRow {
  std::string scenario;
  double gamma;
  Optimum optimum;
};
/// Rows ordered by (scenario as given, gamma).
std::vector<YieldRow> yields(const YieldSweepSpec& spec, const SolverConfig& cfg = {});

struct SimRow {
  double e;
  int n;
  double repayment;
  SimResult sim;
  Moments exact;
  double z_mean;  // (empirical - exact) / std error; 0 when both agree exactly
};
/// One row per (e, n). A negative repayment selects the binding w for each row.
std::vector<SimRow> simulate(std::span<const double> e_grid, std::span<const int> n_grid,
                             double repayment, const MarketParams& params,
                             const SimConfig& cfg);

}  // namespace jlese::sweeps
