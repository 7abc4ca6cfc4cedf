#pragma once

#include "precis/rules.hpp"

namespace precis {

// mu_ell = E|Z|^ell for standard normal Z: 2^(ell/2) Gamma((ell+1)/2)/sqrt(pi).
double gaussian_moment(double ell);

struct IndexReport {
  double ell = 1;
  double ind = 0;                    // the index itself
  double mu_ell = 0;                 // gaussian_moment(ell)
  double predicted_error_coeff = 0;  // mu_ell 2^(ell/4) ind
  double quad_error = 0;             // quadrature error estimate for ind
};

// Incentivization index of order ell:
//   Ind(f) = integral_0^1 (x(1-x)/R''(x))^(ell/4) dx
// for the normalized version of the rule (non-normalized input is normalized
// internally; the index is invariant under the affine renaming anyway only
// after that step). The integrand is symmetric for proper rules, so it is
// evaluated on [1/2, 1) and doubled; a second route through
// (x(1-x)^2/f'(x))^(ell/4) must agree to 1e-7 or the report is refused.
IndexReport incentivization_index(const Rule& rule, double ell,
                                  double rel_tol = 1e-9);

// The same integral without normalizing first: scales as a^(-ell/4) under
// f -> a f + b, which makes it the right building block when the caller
// manages normalization itself.
double raw_index_integral(const Rule& rule, double ell, double rel_tol = 1e-9);

// Predicted mean posterior error at flip cost c for a rational expert paid
// by this rule: mu_ell 2^(ell/4) Ind c^(ell/4), with the error measured as
// E|p_true - q|^ell.
double predicted_error(const Rule& rule, double ell, double c);

// How much precision the rule buys per unit cost relative to the order-ell
// optimum: (Ind(opt:ell)/Ind(rule))^(1/ell), in (0, 1].
double precision_ratio(const Rule& rule, double ell);

}  // namespace precis
