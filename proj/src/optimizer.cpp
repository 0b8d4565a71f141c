#include "jlese/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "jlese/errors.hpp"

namespace jlese {

namespace {

constexpr int kBracketScanPoints = 64;
constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double probability_at(double score, const ScoreLink& link) {
  return success_probability(score, link);
}

double group_objective(double score, double n, const MarketParams& params,
                       const CostModel& cost, const ScoreLink& link) {
  return binding_objective_at(probability_at(score, link), n, params, cost);
}

// Brent's method on a sign-changing bracket. Stops once |f| <= tol.
double brent_root(const std::function<double(double)>& f, double a, double b, double fa,
                  double fb, double tol, int max_iter) {
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a;
  bool bisected = true;
  for (int iter = 0; iter < max_iter; ++iter) {
    if (std::abs(fb) <= tol) return b;
    if (std::abs(b - a) <= 4.0 * kEps * std::max(1.0, std::abs(b))) break;

    double s;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    const double lo = std::min((3.0 * a + b) / 4.0, b);
    const double hi = std::max((3.0 * a + b) / 4.0, b);
    const bool reject = !(s > lo && s < hi) ||
                        (bisected && std::abs(s - b) >= std::abs(b - c) / 2.0) ||
                        (!bisected && std::abs(s - b) >= std::abs(c - d) / 2.0);
    if (reject) {
      s = 0.5 * (a + b);
      bisected = true;
    } else {
      bisected = false;
    }
    const double fs = f(s);
    d = c;
    c = b;
    fc = fb;
    if ((fa < 0.0) != (fs < 0.0)) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  if (std::abs(fb) <= tol) return b;
  throw SolverError("FOC root did not converge: |g| = " + describe(std::abs(fb)) +
                        " on [" + describe(std::min(a, b)) + ", " + describe(std::max(a, b)) +
                        "]",
                    std::min(a, b), std::max(a, b));
}

}  // namespace

void SolverConfig::validate() const {
  if (!(abs_tol > 0.0)) throw ConfigError("abs_tol must be > 0");
  if (grid_points < 3) throw ConfigError("grid_points must be >= 3");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
}

Optimum optimal_ese_pair(const MarketParams& params, const CostModel& cost,
                         const ScoreLink& link) {
  params.validate();
  cost.validate();
  link.validate();
  if (link.slope == 0.0) {
    return {kMinScore, true, binding_objective_at(link.baseline, 2, params, cost)};
  }
  const double e_star =
      (params.high_income() + params.low_income()) / (2.0 * params.low_income() + cost.scale);
  const double raw = (e_star - link.baseline) / link.slope;
  const double score = std::clamp(raw, kMinScore, kMaxScore);
  const bool clamped = score != raw;
  return {score, clamped, group_objective(score, 2, params, cost, link)};
}

double optimal_ese_pair_as_printed(const MarketParams& params, const CostModel& cost,
                                   const ScoreLink& link) {
  const double py = params.high_income();
  const double pyl = params.low_income();
  const double b = link.baseline;
  const double k = link.slope;
  return (py + (2.0 * b - 1.0) * pyl - cost.scale * b) / (cost.scale * k - 2.0 * k * pyl);
}

double foc_residual(double score, double group_size, const MarketParams& params,
                    const CostModel& cost, const ScoreLink& link) {
  const double e = probability_at(score, link);
  return params.high_income() +
         params.low_income() * (group_size * std::pow(1.0 - e, group_size - 1.0) - 1.0) -
         cost.marginal(e);
}

Optimum optimal_ese_group_continuous(double group_size, const MarketParams& params,
                                     const CostModel& cost, const ScoreLink& link,
                                     const SolverConfig& cfg) {
  params.validate();
  cost.validate();
  link.validate();
  cfg.validate();
  if (!(group_size >= 1.0)) throw DomainError("group size must be >= 1");
  if (!(link.slope > 0.0)) throw DomainError("optimal_ese_group requires k > 0");

  const auto g = [&](double s) { return foc_residual(s, group_size, params, cost, link); };

  std::vector<double> xs(kBracketScanPoints), gs(kBracketScanPoints);
  for (int i = 0; i < kBracketScanPoints; ++i) {
    xs[i] = i == kBracketScanPoints - 1
                ? kMaxScore
                : kMaxScore * static_cast<double>(i) / (kBracketScanPoints - 1);
    gs[i] = g(xs[i]);
  }

  std::vector<double> roots;
  for (int i = 0; i < kBracketScanPoints; ++i) {
    if (gs[i] == 0.0) {
      roots.push_back(xs[i]);
      continue;
    }
    if (i + 1 < kBracketScanPoints && gs[i + 1] != 0.0 && (gs[i] < 0.0) != (gs[i + 1] < 0.0)) {
      roots.push_back(brent_root(g, xs[i], xs[i + 1], gs[i], gs[i + 1], cfg.abs_tol,
                                 cfg.max_iter));
    }
  }

  // Candidates: every stationary point, then both ends. Strict comparison
  // keeps a root when it ties with an end point.
  Optimum best{0.0, false, -std::numeric_limits<double>::infinity()};
  for (double r : roots) {
    const double v = group_objective(r, group_size, params, cost, link);
    if (v > best.objective_value) best = {r, false, v};
  }
  for (double end : {kMinScore, kMaxScore}) {
    const double v = group_objective(end, group_size, params, cost, link);
    if (v > best.objective_value) best = {end, true, v};
  }
  return best;
}

Optimum optimal_ese_group(const GroupSpec& group, const MarketParams& params,
                          const CostModel& cost, const ScoreLink& link,
                          const SolverConfig& cfg) {
  group.validate();
  return optimal_ese_group_continuous(group.size, params, cost, link, cfg);
}

double dE_dn(double group_size, double score, const MarketParams& params,
             const CostModel& cost, const ScoreLink& link) {
  const double e = probability_at(score, link);
  if (!(e > 0.0 && e < 1.0)) {
    throw DomainError("dE_dn requires 0 < e < 1, got " + describe(e));
  }
  if (!(group_size >= 1.0)) throw DomainError("group size must be >= 1");
  const double n = group_size;
  const double pyl = params.low_income();
  const double numer = pyl * std::pow(1.0 - e, n - 1.0) * (1.0 + n * std::log(1.0 - e));
  const double denom =
      link.slope * (pyl * n * (n - 1.0) * std::pow(1.0 - e, n - 2.0) + cost.scale);
  return numer / denom;
}

double dE_dn(const GroupSpec& group, double score, const MarketParams& params,
             const CostModel& cost, const ScoreLink& link) {
  group.validate();
  return dE_dn(static_cast<double>(group.size), score, params, cost, link);
}

double dE_dn_as_printed(double group_size, double score, const MarketParams& params,
                        const CostModel& cost, const ScoreLink& link) {
  const double e = probability_at(score, link);
  if (!(e > 0.0 && e < 1.0)) {
    throw DomainError("dE_dn requires 0 < e < 1, got " + describe(e));
  }
  const double n = group_size;
  const double pyl = params.low_income();
  const double numer = pyl * std::pow(1.0 - e, n - 1.0) * (1.0 + n * std::log(1.0 - e));
  const double denom =
      pyl * (n * std::pow(1.0 - e, n - 1.0) * (n - 1.0) * link.slope / (1.0 - e)) +
      cost.scale * e;
  return numer / denom;
}

ClampedScore ese_limit(const MarketParams& params, const CostModel& cost,
                       const ScoreLink& link) {
  if (!(link.slope > 0.0)) throw DomainError("ese_limit requires k > 0");
  if (!(cost.scale > 0.0)) throw DomainError("ese_limit requires c > 0");
  const double raw =
      (params.price * (params.y_high - params.y_low) / cost.scale - link.baseline) / link.slope;
  const double score = std::clamp(raw, kMinScore, kMaxScore);
  return {score, score != raw};
}

Optimum argmax_grid(const std::function<double(double)>& objective, double lo, double hi,
                    const SolverConfig& cfg) {
  cfg.validate();
  if (!(lo < hi)) throw DomainError("argmax_grid requires lo < hi");

  const auto eval = [&](double x) {
    const double v = objective(x);
    if (!std::isfinite(v)) {
      throw EvaluationError("objective is not finite at " + describe(x), x);
    }
    return v;
  };

  const int n = cfg.grid_points;
  const double spacing = (hi - lo) / (n - 1);
  const auto grid_x = [&](int i) { return i == n - 1 ? hi : lo + spacing * i; };

  int best_i = 0;
  double best_f = eval(lo);
  for (int i = 1; i < n; ++i) {
    const double v = eval(grid_x(i));
    if (v > best_f) {
      best_f = v;
      best_i = i;
    }
  }

  // Golden section on the two grid cells around the best point.
  double a = grid_x(std::max(best_i - 1, 0));
  double b = grid_x(std::min(best_i + 1, n - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c), fd = eval(d);
  const double width_tol = 1e-12 * (hi - lo);
  for (int iter = 0; iter < cfg.max_iter && (b - a) > width_tol; ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  double x = fc >= fd ? c : d;
  double fx = std::max(fc, fd);

  // Golden section only resolves the peak to ~sqrt(eps); fit parabolas on
  // shrinking stencils while the curvature stands clear of rounding noise.
  bool polished = false;
  for (double h = spacing; h > 1e-10 * (hi - lo); h /= 10.0) {
    const double xm = std::max(lo, x - h);
    const double xp = std::min(hi, x + h);
    if (!(xm < x && x < xp)) break;
    const double fm = eval(xm), fp = eval(xp);
    const double noise = 64.0 * kEps * std::max({std::abs(fm), std::abs(fx), std::abs(fp), 1.0});
    const double slope_r = (fp - fx) / (xp - x);
    const double slope_l = (fx - fm) / (x - xm);
    const double curvature = (slope_r - slope_l) / (xp - xm);
    if (!(curvature < 0.0) || -curvature * (x - xm) * (xp - x) < 1e3 * noise) break;
    const double num = (x - xm) * (x - xm) * (fx - fp) - (x - xp) * (x - xp) * (fx - fm);
    const double den = (x - xm) * (fx - fp) - (x - xp) * (fx - fm);
    const double vertex = std::clamp(x - 0.5 * num / den, lo, hi);
    const double fv = eval(vertex);
    if (fv >= fx - noise) {
      x = vertex;
      fx = fv;
      polished = true;
    }
  }

  const double noise = 64.0 * kEps * std::max(std::abs(best_f), 1.0);
  const bool refined_wins = polished ? fx >= best_f - noise : fx > best_f;
  if (!refined_wins) {
    x = grid_x(best_i);
    fx = best_f;
  }
  return {x, x == lo || x == hi, fx};
}

}  // namespace jlese
