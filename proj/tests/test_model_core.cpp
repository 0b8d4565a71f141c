#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "jlese/errors.hpp"
#include "jlese/model_core.hpp"

using namespace jlese;

namespace {

MarketParams market(double eps = 0.0, double delta = 0.0) {
  MarketParams m;
  m.epsilon = eps;
  m.delta = delta;
  return m;
}

// Binomial pmf by repeated multiplication, independent of the library's
// incremental update.
double binom_pmf(int n, int k, double q) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c * std::pow(q, k) * std::pow(1.0 - q, n - k);
}

// Member profit summed straight from the sharing rule.
double group_profit_oracle(double e, int n, double w, const MarketParams& m, double c) {
  double total = 0.0;
  for (int k = 0; k <= n - 1; ++k) {
    const double share = m.high_income() - w - k * (w - m.low_income()) / (n - k);
    total += e * binom_pmf(n - 1, k, 1.0 - e) * share;
  }
  return total - 0.5 * c * e * e;
}

}  // namespace

TEST(SuccessProbability, Examples) {
  EXPECT_DOUBLE_EQ(success_probability(50, {0.01, 0.0}), 0.5);
  EXPECT_DOUBLE_EQ(success_probability(100, {0.007, 0.3}), 1.0);
  EXPECT_DOUBLE_EQ(success_probability(0, {0.007, 0.3}), 0.3);
}

TEST(SuccessProbability, RejectsScoreOutsideRange) {
  EXPECT_THROW(success_probability(-0.1, {}), DomainError);
  EXPECT_THROW(success_probability(100.1, {}), DomainError);
  EXPECT_THROW(success_probability(NAN, {}), DomainError);
}

TEST(ScoreLink, Validation) {
  EXPECT_NO_THROW((ScoreLink{0.007, 0.3}.validate()));
  EXPECT_THROW((ScoreLink{0.01, 0.5}.validate()), DomainError);
  EXPECT_THROW((ScoreLink{-0.01, 0.5}.validate()), DomainError);
}

TEST(MarketParams, Validation) {
  EXPECT_NO_THROW(MarketParams{}.validate());
  MarketParams m;
  m.y_low = m.y_high;
  EXPECT_THROW(m.validate(), DomainError);
  m = {};
  m.delta = 1.0;
  EXPECT_THROW(m.validate(), DomainError);
  m = {};
  m.price = 0.0;
  EXPECT_THROW(m.validate(), DomainError);
  m = {};
  m.loan = -1.0;
  EXPECT_THROW(m.validate(), DomainError);
}

TEST(BindingRepayment, Examples) {
  EXPECT_DOUBLE_EQ(binding_repayment(1.0, 2, market(0.05)).repayment, 105.0);
  const auto w2 = binding_repayment(0.5, 2, market());
  EXPECT_NEAR(w2.repayment, 100.0 / 0.75, 1e-12);
  EXPECT_NEAR(w2.repayment * (1.0 - 0.25), 100.0, 1e-12);
  EXPECT_EQ(w2.group_size, 2);
  const auto w1 = binding_repayment(0.5, 1, market());
  EXPECT_NEAR(w1.repayment, 200.0, 1e-12);
  EXPECT_NEAR(w1.repayment * 0.5, 100.0, 1e-12);
}

TEST(BindingRepayment, ZeroSuccessIsDomainError) {
  EXPECT_THROW(binding_repayment(0.0, 2, market()), DomainError);
  EXPECT_THROW(binding_repayment(1.1, 2, market()), DomainError);
  EXPECT_THROW(binding_repayment(0.5, 0, market()), DomainError);
}

TEST(LoanCeilings, Affordability) {
  EXPECT_NEAR(loan_ceiling_affordability(1.0, market()), 750.0, 1e-12);
  EXPECT_NEAR(loan_ceiling_affordability(0.5, market()), 562.5, 1e-12);
  EXPECT_NEAR(loan_ceiling_affordability(0.5, market(0.05)), 562.5 / 1.05, 1e-10);
}

TEST(LoanCeilings, AffordabilityBindsConstraintWithBindingRepayment) {
  // Two repayments equal one high plus one low income at the ceiling.
  for (double e : {0.2, 0.5, 0.9}) {
    MarketParams m = market(0.05);
    m.loan = loan_ceiling_affordability(e, m);
    const double w = binding_repayment(e, 2, m).repayment;
    EXPECT_NEAR(2.0 * w, m.high_income() + m.low_income(), 1e-9);
  }
}

TEST(LoanCeilings, Incentive) {
  EXPECT_NEAR(loan_ceiling_incentive(1.0, market()), 250.0, 1e-12);
  EXPECT_NEAR(loan_ceiling_incentive(0.5, market(0.0, 0.9)), 500.0 / (2.0 / 0.75 - 0.9), 1e-10);
  EXPECT_NEAR(loan_ceiling_incentive(0.5, market(0.0, 0.9)), 283.0188679245, 1e-9);
  EXPECT_NEAR(loan_ceiling_incentive(0.5, market()), 187.5, 1e-12);
}

TEST(LoanCeilings, BothIncentiveFormsAgree) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.01, 1.0), d(0.0, 0.99), eps(0.0, 0.3);
  for (int i = 0; i < 500; ++i) {
    const MarketParams m = market(eps(rng), d(rng));
    const double e = u(rng);
    const double a = loan_ceiling_incentive(e, m);
    const double b = loan_ceiling_incentive_expanded(e, m);
    EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST(ExpectedProfitPair, Examples) {
  const ScoreLink link{0.01, 0.0};
  EXPECT_DOUBLE_EQ(expected_profit_pair(0, 150, market(), CostModel{1000}, link), 0.0);
  EXPECT_DOUBLE_EQ(expected_profit_pair(100, 500, market(), CostModel{0}, link), 500.0);
  EXPECT_NEAR(expected_profit_pair(50, 150, market(), CostModel{1000}, link), 387.5, 1e-10);
}

TEST(ExpectedProfitPair, MatchesDistributionMeanMinusCost) {
  const auto d = profit_distribution_pair(0.5, 150, market());
  EXPECT_NEAR(d.mean() - 125.0, 387.5, 1e-10);
}

TEST(ExpectedProfitGroup, Examples) {
  const ScoreLink link{0.01, 0.0};
  EXPECT_NEAR(expected_profit_group(50, {3}, 150, market(), CostModel{0}, link), 556.25, 1e-10);
  EXPECT_NEAR(expected_profit_group_sum(50, {3}, 150, market(), CostModel{0}, link), 556.25,
              1e-10);
  EXPECT_NEAR(expected_profit_group_sum(50, {2}, 150, market(), CostModel{0}, link), 512.5, 1e-10);
  for (int n : {1, 2, 7, 40}) {
    EXPECT_NEAR(expected_profit_group(100, {n}, 150, market(), CostModel{0}, link), 850.0, 1e-10);
  }
}

TEST(ExpectedProfitGroup, SingleMemberReduces) {
  for (double e : {0.1, 0.4, 0.95}) {
    const double expect = e * (1000.0 - 150.0) - 0.5 * 700.0 * e * e;
    EXPECT_NEAR(expected_profit_group_sum_at(e, 1, 150, market(), CostModel{700}), expect, 1e-10);
    EXPECT_NEAR(expected_profit_group_at(e, 1, 150, market(), CostModel{700}), expect, 1e-10);
  }
}

TEST(ExpectedProfitGroup, PairIdentityProperty) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> score(0, 100), w(50, 900), c(0, 3000), b(0, 0.5);
  for (int i = 0; i < 300; ++i) {
    const double base = b(rng);
    const ScoreLink link{(1.0 - base) / 100.0, base};
    const CostModel cost{c(rng)};
    const double E = score(rng), wv = w(rng);
    const double a = expected_profit_pair(E, wv, market(), cost, link);
    const double g = expected_profit_group(E, {2}, wv, market(), cost, link);
    EXPECT_NEAR(a, g, 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST(ExpectedProfitGroup, ClosedFormMatchesIndependentOracle) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> e(0.01, 0.99), w(50, 900), c(0, 3000);
  for (int i = 0; i < 200; ++i) {
    const int n = 1 + static_cast<int>(rng() % 40);
    const double ev = e(rng), wv = w(rng), cv = c(rng);
    const double oracle = group_profit_oracle(ev, n, wv, market(), cv);
    const double closed = expected_profit_group_at(ev, n, wv, market(), CostModel{cv});
    EXPECT_NEAR(closed, oracle, 1e-9 * std::max(1.0, std::abs(oracle))) << "n=" << n;
  }
}

TEST(ProfitDistribution, PairRows) {
  const auto d = profit_distribution_pair(0.5, 150, market());
  ASSERT_EQ(d.size(), 4u);
  const double profits[] = {850, 1200, 0, 0};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(d.outcomes()[i].probability, 0.25);
    EXPECT_DOUBLE_EQ(d.outcomes()[i].profit, profits[i]);
  }
}

TEST(ProfitDistribution, Degenerate) {
  const auto zero = profit_distribution_pair(0.0, 150, market()).merged();
  ASSERT_EQ(zero.size(), 1u);
  EXPECT_DOUBLE_EQ(zero.outcomes()[0].profit, 0.0);
  EXPECT_DOUBLE_EQ(zero.outcomes()[0].probability, 1.0);
  const auto one = profit_distribution_group(1.0, 5, 150, market()).merged();
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one.outcomes()[0].profit, 850.0);
}

TEST(ProfitDistribution, GroupOfTwoMatchesPairAfterMerge) {
  for (double e : {0.2, 0.5, 0.77}) {
    const auto a = profit_distribution_pair(e, 150, market()).merged();
    const auto b = profit_distribution_group(e, 2, 150, market()).merged();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a.outcomes()[i].probability, b.outcomes()[i].probability, 1e-15);
      EXPECT_NEAR(a.outcomes()[i].profit, b.outcomes()[i].profit, 1e-12);
    }
  }
}

TEST(ProfitDistribution, GroupExamples) {
  const auto one = profit_distribution_group(0.5, 1, 150, market());
  ASSERT_EQ(one.size(), 2u);
  EXPECT_DOUBLE_EQ(one.outcomes()[0].probability, 0.5);
  EXPECT_DOUBLE_EQ(one.outcomes()[0].profit, 850.0);
  EXPECT_DOUBLE_EQ(one.outcomes()[1].profit, 0.0);
  EXPECT_NEAR(profit_distribution_group(0.5, 3, 150, market()).mean(), 556.25, 1e-10);
}

TEST(ProfitDistribution, LargeGroupStaysNormalized) {
  const auto d = profit_distribution_group(0.37, 1000, 150, market());
  double total = 0.0;
  for (const auto& o : d.outcomes()) total += o.probability;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW(profit_distribution_group(0.5, 1001, 150, market()), DomainError);
}

TEST(ProfitDistribution, RejectsBadRows) {
  EXPECT_THROW(ProfitDistribution({}), DomainError);
  EXPECT_THROW(ProfitDistribution({{0.5, 1.0}, {0.4, 2.0}}), DomainError);
  EXPECT_THROW(ProfitDistribution({{1.2, 1.0}, {-0.2, 2.0}}), DomainError);
  EXPECT_THROW(ProfitDistribution({{1.0, INFINITY}}), DomainError);
}

TEST(ProfitDistribution, MergedIsOrderIndependent) {
  const ProfitDistribution a({{0.2, 3.0}, {0.3, 1.0}, {0.5, 3.0}});
  const ProfitDistribution b({{0.5, 3.0}, {0.2, 3.0}, {0.3, 1.0}});
  const auto ma = a.merged(), mb = b.merged();
  ASSERT_EQ(ma.size(), 2u);
  ASSERT_EQ(mb.size(), 2u);
  EXPECT_DOUBLE_EQ(ma.outcomes()[0].profit, 1.0);
  EXPECT_DOUBLE_EQ(ma.outcomes()[1].probability, mb.outcomes()[1].probability);
  EXPECT_NEAR(ma.outcomes()[1].probability, 0.7, 1e-15);
}

TEST(BindingObjective, EqualsGroupProfitWithBindingRepayment) {
  const MarketParams m = market(0.05);
  for (int n : {1, 2, 5, 30}) {
    for (double e : {0.1, 0.5, 0.9}) {
      const double w = binding_repayment(e, n, m).repayment;
      EXPECT_NEAR(binding_objective_at(e, n, m, CostModel{1000}),
                  expected_profit_group_at(e, n, w, m, CostModel{1000}), 1e-9);
    }
  }
}
