#include "jlese/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "jlese/errors.hpp"

namespace jlese {

namespace {

constexpr double kProbabilitySumTol = 1e-12;
// Slack for 100*k + b landing a few ulps above 1 (e.g. k = (1-b)/100).
constexpr double kLinkSlack = 1e-12;
constexpr int kMaxEnumeratedGroup = 1000;

std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require(bool cond, const char* msg) {
  if (!cond) throw DomainError(msg);
}

void require_group(int n) {
  if (n < 1) throw DomainError("group size must be >= 1, got " + std::to_string(n));
}

// (1-e)^n with the convention 0^0 = 1.
double fail_pow(double e, double n) { return std::pow(1.0 - e, n); }

}  // namespace

namespace detail {
void require_probability(double e, const char* what) {
  if (!(e >= 0.0 && e <= 1.0)) {
    throw DomainError(std::string(what) + ": probability must lie in [0, 1], got " + fmt_value(e));
  }
}
}  // namespace detail

void MarketParams::validate() const {
  require(std::isfinite(price) && price > 0.0, "price must be > 0");
  require(std::isfinite(loan) && loan > 0.0, "loan must be > 0");
  require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be >= 0");
  require(std::isfinite(y_low) && y_low > 0.0, "y_low must be > 0");
  require(std::isfinite(y_high) && y_high > y_low, "y_high must exceed y_low");
  require(std::isfinite(delta) && delta >= 0.0 && delta < 1.0, "delta must lie in [0, 1)");
}

void ScoreLink::validate() const {
  require(std::isfinite(slope) && slope >= 0.0, "slope k must be >= 0");
  require(std::isfinite(baseline) && baseline >= 0.0 && baseline <= 1.0,
          "baseline b must lie in [0, 1]");
  const double top = kMaxScore * slope + baseline;
  if (!(top <= 1.0 + kLinkSlack)) {
    throw DomainError("100*k + b must not exceed 1, got " + fmt_value(top));
  }
}

void CostModel::validate() const {
  require(std::isfinite(scale) && scale >= 0.0, "cost scale c must be >= 0");
}

void GroupSpec::validate() const { require_group(size); }

ProfitDistribution::ProfitDistribution(std::vector<Outcome> outcomes)
    : outcomes_(std::move(outcomes)) {
  require(!outcomes_.empty(), "profit distribution must not be empty");
  double total = 0.0;
  for (const auto& o : outcomes_) {
    if (!(o.probability >= 0.0 && o.probability <= 1.0)) {
      throw DomainError("outcome probability outside [0, 1]: " + fmt_value(o.probability));
    }
    require(std::isfinite(o.profit), "outcome profit must be finite");
    total += o.probability;
  }
  if (!(std::abs(total - 1.0) <= kProbabilitySumTol)) {
    throw DomainError("outcome probabilities sum to " + fmt_value(total));
  }
}

double ProfitDistribution::mean() const {
  double m = 0.0;
  for (const auto& o : outcomes_) m += o.probability * o.profit;
  return m;
}

double ProfitDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& o : outcomes_) {
    const double d = o.profit - m;
    v += o.probability * d * d;
  }
  return v;
}

ProfitDistribution ProfitDistribution::merged() const {
  std::map<double, double> by_profit;
  for (const auto& o : outcomes_) by_profit[o.profit] += o.probability;
  std::vector<Outcome> rows;
  rows.reserve(by_profit.size());
  for (const auto& [profit, prob] : by_profit) {
    if (prob > 0.0) rows.push_back({prob, profit});
  }
  return ProfitDistribution(std::move(rows));
}

double success_probability(double score, const ScoreLink& link) {
  if (!(score >= kMinScore && score <= kMaxScore)) {
    throw DomainError("ESE score must lie in [0, 100], got " + fmt_value(score));
  }
  link.validate();
  return std::clamp(link.slope * score + link.baseline, 0.0, 1.0);
}

RepaymentContract binding_repayment(double e, int group_size, const MarketParams& params) {
  require_group(group_size);
  if (!(e > 0.0 && e <= 1.0)) {
    throw DomainError("binding repayment needs 0 < e <= 1 (zero success mass), got " +
                      fmt_value(e));
  }
  const double mass = 1.0 - fail_pow(e, group_size);
  return {params.gross_repayment() / mass, group_size};
}

double loan_ceiling_affordability(double e, const MarketParams& params) {
  detail::require_probability(e, "loan_ceiling_affordability");
  const double mass = 1.0 - fail_pow(e, 2);
  return (params.high_income() + params.low_income()) / (2.0 * (1.0 + params.epsilon)) * mass;
}

double loan_ceiling_incentive(double e, const MarketParams& params) {
  require(e > 0.0 && e <= 1.0, "loan_ceiling_incentive needs 0 < e <= 1");
  const double mass = 1.0 - fail_pow(e, 2);
  const double denom = 2.0 * (1.0 + params.epsilon) / mass - params.delta;
  require(denom > 0.0, "incentive ceiling denominator must be positive");
  return params.low_income() / denom;
}

double loan_ceiling_incentive_expanded(double e, const MarketParams& params) {
  detail::require_probability(e, "loan_ceiling_incentive_expanded");
  const double s = 2.0 * e - e * e;
  return params.low_income() * s / (2.0 * (1.0 + params.epsilon) - params.delta * s);
}

double expected_profit_pair_at(double e, double repayment, const MarketParams& params,
                               const CostModel& cost) {
  detail::require_probability(e, "expected_profit_pair");
  const double both = params.high_income() - repayment;
  const double covers = params.high_income() + params.low_income() - 2.0 * repayment;
  return e * e * both + e * (1.0 - e) * covers - cost.disutility(e);
}

double expected_profit_pair(double score, double repayment, const MarketParams& params,
                            const CostModel& cost, const ScoreLink& link) {
  return expected_profit_pair_at(success_probability(score, link), repayment, params, cost);
}

double expected_profit_group_at(double e, int group_size, double repayment,
                                const MarketParams& params, const CostModel& cost) {
  detail::require_probability(e, "expected_profit_group");
  require_group(group_size);
  const double all_fail = fail_pow(e, group_size);
  return e * params.high_income() - repayment * (1.0 - all_fail) +
         params.low_income() * ((1.0 - e) - all_fail) - cost.disutility(e);
}

double expected_profit_group(double score, const GroupSpec& group, double repayment,
                             const MarketParams& params, const CostModel& cost,
                             const ScoreLink& link) {
  return expected_profit_group_at(success_probability(score, link), group.size, repayment,
                                  params, cost);
}

ProfitDistribution profit_distribution_group(double e, int group_size, double repayment,
                                             const MarketParams& params) {
  detail::require_probability(e, "profit_distribution_group");
  require_group(group_size);
  require(group_size <= kMaxEnumeratedGroup, "enumeration supports group sizes up to 1000");

  const int peers = group_size - 1;
  const double shortfall = repayment - params.low_income();
  std::vector<Outcome> rows;
  rows.reserve(static_cast<std::size_t>(group_size) + 1);
  // C(peers, k) updated incrementally in floating point.
  double binom = 1.0;
  for (int k = 0; k <= peers; ++k) {
    const double prob = binom * std::pow(e, group_size - k) * std::pow(1.0 - e, k);
    const double profit =
        params.high_income() - repayment - k * shortfall / static_cast<double>(group_size - k);
    rows.push_back({prob, profit});
    binom = binom * static_cast<double>(peers - k) / static_cast<double>(k + 1);
  }
  rows.push_back({1.0 - e, 0.0});
  return ProfitDistribution(std::move(rows));
}

double expected_profit_group_sum_at(double e, int group_size, double repayment,
                                    const MarketParams& params, const CostModel& cost) {
  return profit_distribution_group(e, group_size, repayment, params).mean() -
         cost.disutility(e);
}

double expected_profit_group_sum(double score, const GroupSpec& group, double repayment,
                                 const MarketParams& params, const CostModel& cost,
                                 const ScoreLink& link) {
  return expected_profit_group_sum_at(success_probability(score, link), group.size, repayment,
                                      params, cost);
}

ProfitDistribution profit_distribution_pair(double e, double repayment,
                                            const MarketParams& params) {
  detail::require_probability(e, "profit_distribution_pair");
  const double both = params.high_income() - repayment;
  const double covers = params.high_income() + params.low_income() - 2.0 * repayment;
  return ProfitDistribution({
      {e * e, both},
      {e * (1.0 - e), covers},
      {(1.0 - e) * e, 0.0},
      {(1.0 - e) * (1.0 - e), 0.0},
  });
}

double binding_objective_at(double e, double group_size, const MarketParams& params,
                            const CostModel& cost) {
  return e * params.high_income() - params.gross_repayment() +
         params.low_income() * ((1.0 - e) - fail_pow(e, group_size)) - cost.disutility(e);
}

}  // namespace jlese
