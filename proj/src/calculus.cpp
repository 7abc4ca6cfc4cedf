#include "precis/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "precis/quadrature.hpp"

namespace precis {

double mean_reward(const Rule& rule, double rel_tol) {
  return integrate_open([&](double p) { return rule.reward(p); }, 0.0, 1.0,
                        rel_tol)
      .value;
}

MeanRewardDetail mean_reward_detail(const Rule& rule, double rel_tol) {
  MeanRewardDetail d;
  double fh = rule.f(0.5);
  d.direct = mean_reward(rule, rel_tol);
  d.via_fprime =
      fh + integrate_open([&](double x) { return (1.0 - x) * rule.f_prime(x); },
                          0.5, 1.0, rel_tol)
               .value;
  d.via_f = 0.5 * fh + integrate_open([&](double x) { return rule.f(x); }, 0.5,
                                      1.0, rel_tol)
                           .value;
  d.spread = std::max({std::abs(d.direct - d.via_fprime),
                       std::abs(d.direct - d.via_f),
                       std::abs(d.via_fprime - d.via_f)});
  return d;
}

std::pair<Rule, NormalizationReport> normalize_rule(const Rule& rule,
                                                    double rel_tol) {
  double fh = rule.f(0.5);
  double m;
  try {
    m = mean_reward(rule, rel_tol);
  } catch (const NonConvergenceError& e) {
    throw Error(ErrorKind::NonNormalizable,
                std::string("mean reward does not converge: ") + e.what());
  }
  if (!std::isfinite(m) || !std::isfinite(fh))
    throw Error(ErrorKind::NonNormalizable,
                "mean reward or f(1/2) is not finite");
  double denom = m - fh;
  // For a nonconstant proper rule R is convex with its minimum f(1/2) at
  // 1/2, so the mean strictly exceeds it; anything else cannot be scaled.
  if (!(denom > 1e-14 * std::max(1.0, std::abs(m))))
    throw Error(ErrorKind::Degenerate,
                "cannot normalize: mean reward " + std::to_string(m) +
                    " does not exceed f(1/2) = " + std::to_string(fh));
  double a = 1.0 / denom;
  NormalizationReport rep;
  rep.a = a;
  rep.b = -a * fh;
  rep.mean_reward_raw = m;
  rep.f_half_raw = fh;
  return {rule.rescaled(rep.a, rep.b, true), rep};
}

DiagnosticsReport full_diagnostics(const Rule& rule,
                                   const std::vector<double>& costs) {
  DiagnosticsReport rep = check_proper(rule);
  try {
    rep.normalized_residuals.mean_reward = std::abs(mean_reward(rule) - 1.0);
  } catch (const NonConvergenceError&) {
    // leave NaN: the residual is unknowable, which the report shows as such
  }
  for (double c : costs) rep.respectful_at.push_back(check_respectful(rule, c));
  return rep;
}

}  // namespace precis
