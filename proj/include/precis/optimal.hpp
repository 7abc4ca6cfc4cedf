#pragma once

#include "precis/rules.hpp"

namespace precis {

// Normalizing constant of the order-ell precision-optimal rule:
//   kappa_ell = 1 / integral_{1/2}^1 (x(1-x)^3)^(ell/(ell+4)) dx.
// Memoized; ell >= 1.
double kappa(double ell);

// The rule minimizing the incentivization index of order ell among
// normalized rules. Its derivative is
//   f'(x) = kappa_ell (x^ell (1-x)^(2ell-4))^(1/(ell+4))      x in [1/2, 1)
//   f'(x) = kappa_ell (x^(ell-8) (1-x)^(2ell+4))^(1/(ell+4))  x in (0, 1/2)
// (the two branches are the weak-properness mirror of each other), with
// f(1/2) = 0. Normalized by construction.
Rule optimal_rule(double ell);

// The ell -> infinity limit, a closed-form quartic:
//   f(x) = (5/9)(48x^4 - 128x^3 + 96x^2 - 11),  f'(x) = (320/3) x(1-x)^2.
Rule optimal_rule_limit();

// R'' of the order-ell optimal rule: the curvature profile that polynomial
// approximations clamp and fit.
//   phi_ell(x) = kappa_ell (x^(ell-8) (1-x)^ell)^(1/(ell+4))  for x <= 1/2,
// mirrored symmetrically above 1/2. Unbounded at the corners for ell < 8.
double phi_opt(double ell, double x);

}  // namespace precis
