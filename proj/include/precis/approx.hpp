#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "precis/index.hpp"
#include "precis/optimal.hpp"
#include "precis/rules.hpp"

namespace precis {

// phi_ell frozen at distance eps from each endpoint: the bounded curvature
// target a polynomial can actually match.
struct PhiClamp {
  double ell = 1.0;
  double eps = 0.1;  // in (0, min(1/2, phi_ell(1/2)))
};

// phi_ell(clamp(x, eps, 1-eps)) on [0,1]: continuous, symmetric, positive,
// and bounded on the closed interval.
double clamped_phi(const PhiClamp& clamp, double x);

// Polynomial in the Bernstein basis on [0,1]. Evaluation never leaves the
// basis: de Casteljau up to degree 128, above that a renormalized window of
// basis weights (the weight vector is numerically supported on O(sqrt(n))
// indices around its mode).
class BernsteinPoly {
 public:
  explicit BernsteinPoly(std::vector<double> coefficients);

  // Samples fn at i/n, i = 0..n.
  static BernsteinPoly fit(const std::function<double(double)>& fn,
                           int degree);
  // Samples the lower half only and mirrors it, so the coefficient vector is
  // exactly palindromic and the polynomial exactly symmetric about 1/2.
  static BernsteinPoly fit_symmetric(const std::function<double(double)>& fn,
                                     int degree);

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const { return c_; }
  // A valid lower bound for the polynomial on [0,1] (convex combination).
  double min_coefficient() const;

  double operator()(double x) const { return eval_pair(x, 1.0 - x); }
  // Evaluation with an explicit complement: passing (t, s) with t + s = 1
  // exactly keeps mirrored evaluations of a palindromic vector bitwise equal.
  double eval_pair(double t, double s) const;

  BernsteinPoly derivative() const;
  // A with A' = this and A(0) = 0 (one degree up).
  BernsteinPoly antiderivative() const;
  // (1-x) * this (one degree up).
  BernsteinPoly times_one_minus_x() const;

 private:
  std::vector<double> c_;  // size degree + 1
};

// Even-power series of the symmetric part about 1/2: returns q with
// (p(1/2+u) + p(1/2-u))/2 = sum_j q[j] u^(2j), solved at Chebyshev nodes in
// u^2 in long double. Refused above degree 64, where the monomial
// coefficients stop being recoverable in floating point.
std::vector<double> even_series(const BernsteinPoly& p);

// Z = integral_{1/2}^1 (1-x)^2 p dx, closed form in the basis. Dividing the
// curvature by Z makes the assembled rule's mean reward exactly 1.
double curvature_normalizer(const BernsteinPoly& p);

// The normalized rule with R'' = p/Z: f' = (1-x) p/Z, f(1/2) = 0, f found by
// basis antidifferentiation. Requires min_coefficient() > 0, which certifies
// R'' > 0 (hence properness) outright.
Rule rule_from_curvature(const BernsteinPoly& p, std::string name);

struct PolynomialRuleReport {
  int degree = 0;
  double ell = 0, eps = 0;
  double normalizer = 0;         // Z
  double lower_bound = 0;        // min Bernstein coefficient; p >= this on [0,1]
  double grid_min = 0;           // min of p on the 2049-point report grid
  double sup_gap = 0;            // max |p - clamped_phi| on the same grid
  double stabilization_gap = 0;  // accepted |ind_n - ind_{n/2}| / ind_n
                                 // (NaN when the degree was given explicitly)
  double odd_content = 0;        // max |odd part of p about 1/2| (dyadic grid)
  IndexReport index;
  // R'' series about 1/2 (even powers, already divided by Z) and its "poly:"
  // spelling; both empty above the degree-32 emission gate.
  std::vector<double> even_coefficients;
  std::string spec_string;
};

// Bernstein-fits the clamped curvature target and assembles the normalized
// polynomial rule. degree = 0 escalates 16, 32, ..., 4096 until the
// candidate's index stabilizes (relative change <= max(1e-4, eps/64) under a
// degree doubling), failing with the achieved gap if the cap is reached.
// The uniform gap to the target on the report grid is recorded as metadata,
// not used for stopping: near the clamp corner it decays like n^(-1/2), so
// driving it below eps would need astronomical degrees.
std::pair<Rule, PolynomialRuleReport> build_polynomial_rule(double ell,
                                                            double eps,
                                                            int degree = 0);

// The auto-degree rule alone; what `opt:<ell>:respectful:<eps>` parses to.
Rule build_respectful_rule(double ell, double eps);

}  // namespace precis
