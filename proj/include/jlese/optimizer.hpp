#pragma once

#include <functional>

#include "jlese/model_core.hpp"

namespace jlese {

struct Optimum {
  double score = 0.0;
  bool at_boundary = false;  // optimum clamped to 0 or 100
  double objective_value = 0.0;
};

struct ClampedScore {
  double score = 0.0;
  bool at_boundary = false;
};

struct SolverConfig {
  double abs_tol = 1e-10;   // FOC residual tolerance
  int grid_points = 2001;   // argmax_grid resolution
  int max_iter = 200;       // root finder / golden section cap

  void validate() const;
};

/// Closed-form optimum for a pair: e* = (pY + pYlow) / (2 pYlow + c),
/// mapped back to a score and clamped to [0, 100]. With k = 0 the score has
/// no effect and the result is E = 0 flagged as a boundary.
Optimum optimal_ese_pair(const MarketParams& params, const CostModel& cost,
                         const ScoreLink& link);

/// The pair optimum exactly as it is commonly printed,
/// (pY + (2b-1) pYlow - c b) / (c k - 2 k pYlow). This formula does not
/// follow from the pair objective and is kept only for side-by-side
/// reporting; nothing in the library calls it. Unclamped, may be non-finite.
double optimal_ese_pair_as_printed(const MarketParams& params, const CostModel& cost,
                                   const ScoreLink& link);

/// First-order condition for a group of n divided by k:
///   pY + pYlow [n (1-e)^(n-1) - 1] - c e.
/// n may be fractional.
double foc_residual(double score, double group_size, const MarketParams& params,
                    const CostModel& cost, const ScoreLink& link);

/// Optimal score for a group of n by bracketed root finding on the FOC.
/// Throws SolverError if a bracket fails to converge within cfg.max_iter.
Optimum optimal_ese_group(const GroupSpec& group, const MarketParams& params,
                          const CostModel& cost, const ScoreLink& link,
                          const SolverConfig& cfg = {});
/// Same, for fractional group sizes (n >= 1). Used for finite differences in n.
Optimum optimal_ese_group_continuous(double group_size, const MarketParams& params,
                                     const CostModel& cost, const ScoreLink& link,
                                     const SolverConfig& cfg = {});

/// dE*/dn by implicit differentiation of the FOC:
///   pYlow (1-e)^(n-1) [1 + n ln(1-e)] / (k [pYlow n (n-1) (1-e)^(n-2) + c]).
/// Requires 0 < e < 1.
double dE_dn(const GroupSpec& group, double score, const MarketParams& params,
             const CostModel& cost, const ScoreLink& link);
double dE_dn(double group_size, double score, const MarketParams& params,
             const CostModel& cost, const ScoreLink& link);

/// The commonly printed variant whose cost term reads c*e instead of c*k.
/// Kept for reporting only.
double dE_dn_as_printed(double group_size, double score, const MarketParams& params,
                        const CostModel& cost, const ScoreLink& link);

/// Large-group limit of the optimal score, [p(Y - Ylow)/c - b] / k, clamped.
ClampedScore ese_limit(const MarketParams& params, const CostModel& cost,
                       const ScoreLink& link);

/// Global maximizer of a scalar function on [lo, hi]: dense grid, golden
/// section on the best grid cell, then successive parabolic polishing.
/// Ties resolve to the lowest grid point. Throws EvaluationError if the
/// objective is non-finite at any grid point.
Optimum argmax_grid(const std::function<double(double)>& objective, double lo, double hi,
                    const SolverConfig& cfg = {});

}  // namespace jlese
