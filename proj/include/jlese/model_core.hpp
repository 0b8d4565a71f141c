#pragma once

// Contract quantities for the individual-ESE joint liability lending model.
//
// A borrower succeeds (high yield) with probability e = k*E + b, where E is
// the borrower's ESE score in [0, 100]. Successful borrowers repay w and
// cover failed peers' shortfall (w - p*y_low); failed borrowers hand over
// their whole income p*y_low. Effort costs C(e) = c*e^2/2.

#include <span>
#include <vector>

namespace jlese {

inline constexpr double kMinScore = 0.0;
inline constexpr double kMaxScore = 100.0;

struct MarketParams {
  double price = 1.0;     // p, currency per unit
  double y_high = 1000.0; // high-production yield
  double y_low = 500.0;   // low-production yield
  double loan = 100.0;    // principal L
  double epsilon = 0.05;  // risk-free rate
  double delta = 0.9;     // borrower discount factor

  /// Throws DomainError unless p > 0, L > 0, eps >= 0, y_high > y_low > 0
  /// and 0 <= delta < 1.
  void validate() const;

  double high_income() const { return price * y_high; }
  double low_income() const { return price * y_low; }
  double gross_repayment() const { return loan * (1.0 + epsilon); }
};

/// Linear map from ESE score to success probability: e = slope*E + baseline.
struct ScoreLink {
  double slope = 0.01;
  double baseline = 0.0;

  /// Requires e to be a probability over the whole score range.
  void validate() const;
};

/// Quadratic effort disutility C(e) = scale * e^2 / 2.
struct CostModel {
  double scale = 1000.0;

  void validate() const;
  double disutility(double e) const { return 0.5 * scale * e * e; }
  double marginal(double e) const { return scale * e; }
};

struct GroupSpec {
  int size = 2;

  void validate() const;
};

struct Outcome {
  double probability;
  double profit;
};

/// Exact finite distribution of one member's profit.
class ProfitDistribution {
public:
  /// Throws DomainError if empty, any probability is outside [0, 1], any
  /// profit is non-finite, or the probabilities do not sum to 1 (1e-12).
  explicit ProfitDistribution(std::vector<Outcome> outcomes);

  std::span<const Outcome> outcomes() const { return outcomes_; }
  std::size_t size() const { return outcomes_.size(); }

  double mean() const;
  /// Population variance, two-pass around the mean.
  double variance() const;

  /// Outcomes with identical profit merged and zero-mass rows dropped, sorted
  /// by profit. Independent of the input row order.
  ProfitDistribution merged() const;

private:
  std::vector<Outcome> outcomes_;
};

struct RepaymentContract {
  double repayment;  // w, per borrower
  int group_size;
};

/// e = k*E + b. Throws DomainError for E outside [0, 100].
double success_probability(double score, const ScoreLink& link);

/// Smallest w satisfying the lender break-even condition
/// w * (1 - (1-e)^n) >= L(1+eps). Throws DomainError unless 0 < e <= 1.
RepaymentContract binding_repayment(double e, int group_size, const MarketParams& params);

// Loan ceilings for a group of two, with w at its binding value.
/// Affordability ceiling: two repayments covered by one high and one low income.
double loan_ceiling_affordability(double e, const MarketParams& params);
/// Incentive ceiling: a successful borrower prefers repaying (and being
/// refinanced at discount delta) to strategic default.
double loan_ceiling_incentive(double e, const MarketParams& params);
/// The same ceiling in its expanded form p*y_low*s / (2(1+eps) - delta*s),
/// s = 2e - e^2. Kept as an independent algebraic route for tests.
double loan_ceiling_incentive_expanded(double e, const MarketParams& params);

/// Ex-ante expected profit of one member of a pair with fixed repayment w.
double expected_profit_pair(double score, double repayment, const MarketParams& params,
                            const CostModel& cost, const ScoreLink& link);
double expected_profit_pair_at(double e, double repayment, const MarketParams& params,
                               const CostModel& cost);

/// Closed form for a group of n:
/// e*pY - w(1-(1-e)^n) + pYlow[(1-e) - (1-e)^n] - C(e).
double expected_profit_group(double score, const GroupSpec& group, double repayment,
                             const MarketParams& params, const CostModel& cost,
                             const ScoreLink& link);
double expected_profit_group_at(double e, int group_size, double repayment,
                                const MarketParams& params, const CostModel& cost);

/// Explicit binomial sum over the number of failed peers. Serves as the
/// oracle for expected_profit_group; n must be at most 1000.
double expected_profit_group_sum(double score, const GroupSpec& group, double repayment,
                                 const MarketParams& params, const CostModel& cost,
                                 const ScoreLink& link);
double expected_profit_group_sum_at(double e, int group_size, double repayment,
                                    const MarketParams& params, const CostModel& cost);

/// Four outcomes of a pair in fixed order: both succeed, only self succeeds,
/// only peer succeeds, both fail.
ProfitDistribution profit_distribution_pair(double e, double repayment,
                                            const MarketParams& params);

/// n+1 outcomes: self succeeds with k = 0..n-1 failed peers, then own
/// failure (profit 0).
ProfitDistribution profit_distribution_group(double e, int group_size, double repayment,
                                             const MarketParams& params);

/// Expected profit with w at its binding value, as a function of e:
/// e*pY - L(1+eps) + pYlow[(1-e) - (1-e)^n] - C(e). Accepts fractional n.
double binding_objective_at(double e, double group_size, const MarketParams& params,
                            const CostModel& cost);

namespace detail {
void require_probability(double e, const char* what);
}

}  // namespace jlese
