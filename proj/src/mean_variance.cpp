#include "jlese/mean_variance.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jlese/errors.hpp"

namespace jlese {

namespace {

constexpr double kMomentRelTol = 1e-10;
constexpr double kMinBindingProbability = 1e-6;

struct PairPayoffs {
  double both;    // A: both succeed
  double covers;  // B: self succeeds, peer fails
};

PairPayoffs payoffs(double repayment, const MarketParams& params) {
  return {params.high_income() - repayment,
          params.high_income() + params.low_income() - 2.0 * repayment};
}

double mv_slope(double score, double repayment, const MarketParams& params,
                const RiskPreference& risk, const CostModel& cost, const ScoreLink& link,
                double cross_sign) {
  const double e = success_probability(score, link);
  const double k = link.slope;
  const auto [a, b] = payoffs(repayment, params);
  const double e2 = e * e, e3 = e2 * e;
  const double mean_slope = b - 2.0 * e * (params.low_income() - repayment);
  const double var_slope = (2.0 * e - 4.0 * e3) * a * a +
                           (1.0 - 4.0 * e + 6.0 * e2 - 4.0 * e3) * b * b +
                           cross_sign * 2.0 * (3.0 * e2 - 4.0 * e3) * a * b;
  return k * (mean_slope - cost.marginal(e) - 0.5 * risk.gamma * var_slope);
}

}  // namespace

void RiskPreference::validate() const {
  if (!(std::isfinite(gamma) && gamma >= 0.0)) {
    throw DomainError("risk aversion gamma must be >= 0");
  }
}

double profit_variance_pair_expansion(double e, double repayment, const MarketParams& params) {
  detail::require_probability(e, "profit_variance_pair_expansion");
  const auto [a, b] = payoffs(repayment, params);
  const double e2 = e * e, e3 = e2 * e, e4 = e3 * e;
  return (e2 - e4) * a * a + (e - 2.0 * e2 + 2.0 * e3 - e4) * b * b - 2.0 * (e3 - e4) * a * b;
}

Moments profit_moments_pair(double e, double repayment, const MarketParams& params) {
  const auto dist = profit_distribution_pair(e, repayment, params);
  const Moments enumerated{dist.mean(), dist.variance()};
  const double expanded = profit_variance_pair_expansion(e, repayment, params);

  const auto [a, b] = payoffs(repayment, params);
  // Absolute floor for variances that cancel to ~0 at e near 0 or 1.
  const double floor = 1e-13 * (a * a + b * b);
  const double gap = std::abs(expanded - enumerated.variance);
  if (gap > kMomentRelTol * std::max(std::abs(enumerated.variance), std::abs(expanded)) + floor) {
    std::ostringstream os;
    os.precision(17);
    os << "pair variance mismatch at e=" << e << ": enumeration " << enumerated.variance
       << " vs expansion " << expanded;
    throw InvariantError(os.str());
  }
  return enumerated;
}

double mv_utility(double score, double repayment, const MarketParams& params,
                  const RiskPreference& risk, const CostModel& cost, const ScoreLink& link) {
  const double e = success_probability(score, link);
  const auto m = profit_moments_pair(e, repayment, params);
  return m.mean - 0.5 * risk.gamma * m.variance - cost.disutility(e);
}

double mv_foc(double score, double repayment, const MarketParams& params,
              const RiskPreference& risk, const CostModel& cost, const ScoreLink& link) {
  return mv_slope(score, repayment, params, risk, cost, link, -1.0);
}

double mv_foc_as_printed(double score, double repayment, const MarketParams& params,
                         const RiskPreference& risk, const CostModel& cost,
                         const ScoreLink& link) {
  return mv_slope(score, repayment, params, risk, cost, link, +1.0);
}

Optimum optimal_ese_mv(double repayment, const MarketParams& params,
                       const RiskPreference& risk, const CostModel& cost,
                       const ScoreLink& link, const SolverConfig& cfg, RepaymentMode mode) {
  params.validate();
  risk.validate();
  cost.validate();
  link.validate();

  if (mode == RepaymentMode::kExogenous) {
    return argmax_grid(
        [&](double s) { return mv_utility(s, repayment, params, risk, cost, link); },
        kMinScore, kMaxScore, cfg);
  }

  double lo = kMinScore;
  if (link.baseline < kMinBindingProbability) {
    if (!(link.slope > 0.0)) {
      throw DomainError("binding repayment needs a positive success probability");
    }
    lo = (kMinBindingProbability - link.baseline) / link.slope;
  }
  return argmax_grid(
      [&](double s) {
        const double e = success_probability(s, link);
        const double w = binding_repayment(e, 2, params).repayment;
        return mv_utility(s, w, params, risk, cost, link);
      },
      lo, kMaxScore, cfg);
}

}  // namespace jlese
