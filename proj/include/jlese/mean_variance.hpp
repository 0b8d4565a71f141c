#pragma once

// Mean-variance borrower utility for a group of two:
//   U(E) = E[P] - (gamma/2) Var[P] - C(e).

#include "jlese/model_core.hpp"
#include "jlese/optimizer.hpp"

namespace jlese {

struct RiskPreference {
  double gamma = 0.0;  // risk aversion, per currency unit

  void validate() const;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// How the repayment enters the utility.
enum class RepaymentMode {
  kExogenous,  // w held fixed, as in the derivative of the utility
  kBinding,    // w = L(1+eps) / (1 - (1-e)^2) re-evaluated at every score
};

/// Profit moments of a pair. Computed from the four-outcome distribution and
/// cross-checked against the closed polynomial expansion
///   (e^2-e^4) A^2 + (e-2e^2+2e^3-e^4) B^2 - 2(e^3-e^4) A B,
/// A = pY - w, B = pY + pYlow - 2w. Throws InvariantError if they disagree.
Moments profit_moments_pair(double e, double repayment, const MarketParams& params);

/// Variance of a pair's profit from the polynomial expansion alone.
double profit_variance_pair_expansion(double e, double repayment, const MarketParams& params);

double mv_utility(double score, double repayment, const MarketParams& params,
                  const RiskPreference& risk, const CostModel& cost, const ScoreLink& link);

/// Derivative of mv_utility in the score with w held fixed.
double mv_foc(double score, double repayment, const MarketParams& params,
              const RiskPreference& risk, const CostModel& cost, const ScoreLink& link);

/// The commonly printed form of the derivative, whose A*B term carries the
/// opposite sign. It does not match the utility's slope when gamma > 0 and
/// is kept for reporting only.
double mv_foc_as_printed(double score, double repayment, const MarketParams& params,
                         const RiskPreference& risk, const CostModel& cost,
                         const ScoreLink& link);

/// Global maximizer of the mean-variance utility over E in [0, 100] by
/// argmax_grid. In kBinding mode `repayment` is ignored and the search
/// starts where e > 0 so the binding w stays finite.
Optimum optimal_ese_mv(double repayment, const MarketParams& params,
                       const RiskPreference& risk, const CostModel& cost,
                       const ScoreLink& link, const SolverConfig& cfg = {},
                       RepaymentMode mode = RepaymentMode::kExogenous);

}  // namespace jlese
