#pragma once

#include <utility>
#include <vector>

#include "precis/rules.hpp"

namespace precis {

// Mean reward under a uniform true bias: integral of R over (0,1).
double mean_reward(const Rule& rule, double rel_tol = 1e-9);

// The same integral along three independent routes. Integration by parts
// against the symmetry of R gives
//   integral_0^1 R = f(1/2) + integral_{1/2}^1 (1-x) f'(x) dx
//                  = (1/2) f(1/2) + integral_{1/2}^1 f(x) dx,
// so the spread between the routes bounds the numerical (and properness)
// error of the rule's own derivative bookkeeping.
struct MeanRewardDetail {
  double direct = 0;
  double via_fprime = 0;
  double via_f = 0;
  double spread = 0;  // max pairwise disagreement
};
MeanRewardDetail mean_reward_detail(const Rule& rule, double rel_tol = 1e-9);

struct NormalizationReport {
  double a = 1;  // > 0
  double b = 0;
  double mean_reward_raw = 0;
  double f_half_raw = 0;
};

// Affine rescaling a f + b with f(1/2) = 0 and mean reward 1. Degenerate
// when the mean reward does not exceed f(1/2) (constant rules), and
// non-normalizable when the mean reward diverges.
std::pair<Rule, NormalizationReport> normalize_rule(const Rule& rule,
                                                    double rel_tol = 1e-9);

// check_proper plus the normalization residuals and respectfulness probes at
// the given costs.
DiagnosticsReport full_diagnostics(
    const Rule& rule, const std::vector<double>& costs = {0.1, 0.01, 1e-3, 1e-4});

}  // namespace precis
