#include "precis/index.hpp"

#include <cmath>

#include "precis/calculus.hpp"
#include "precis/format.hpp"
#include "precis/optimal.hpp"
#include "precis/quadrature.hpp"

namespace precis {

namespace {

void require_index_order(double ell) {
  if (!std::isfinite(ell) || !(ell >= 1.0))
    throw Error(ErrorKind::Parameter,
                "index order must satisfy ell >= 1, got " + fmt_compact(ell));
}

const double kSqrtPi = 1.7724538509055160273;

}  // namespace

double gaussian_moment(double ell) {
  if (!std::isfinite(ell) || !(ell >= 0.0))
    throw Error(ErrorKind::Parameter, "gaussian moment needs ell >= 0");
  return std::pow(2.0, 0.5 * ell) * std::tgamma(0.5 * (ell + 1.0)) / kSqrtPi;
}

double raw_index_integral(const Rule& rule, double ell, double rel_tol) {
  require_index_order(ell);
  double e4 = 0.25 * ell;
  return 2.0 * integrate_open(
                   [&](double x) {
                     return std::pow(x * (1.0 - x) / rule.reward_second(x), e4);
                   },
                   0.5, 1.0, rel_tol)
                   .value;
}

IndexReport incentivization_index(const Rule& rule, double ell, double rel_tol) {
  require_index_order(ell);
  Rule n = rule.normalized() ? rule : normalize_rule(rule).first;
  double e4 = 0.25 * ell;
  QuadResult via_r2 = integrate_open(
      [&](double x) { return std::pow(x * (1.0 - x) / n.reward_second(x), e4); },
      0.5, 1.0, rel_tol);
  QuadResult via_fp = integrate_open(
      [&](double x) {
        double q = 1.0 - x;
        return std::pow(x * q * q / n.f_prime(x), e4);
      },
      0.5, 1.0, rel_tol);
  double a = 2.0 * via_r2.value, b = 2.0 * via_fp.value;
  if (std::abs(a - b) > 1e-7 * std::max(std::abs(a), 1e-300))
    throw Error(ErrorKind::NonConvergence,
                "index routes disagree: via R'' " + fmt_compact(a) +
                    ", via f' " + fmt_compact(b) +
                    " (inconsistent rule derivatives?)");
  IndexReport rep;
  rep.ell = ell;
  rep.ind = a;
  rep.mu_ell = gaussian_moment(ell);
  rep.predicted_error_coeff = rep.mu_ell * std::pow(2.0, e4) * a;
  rep.quad_error = 2.0 * (via_r2.error_estimate + via_fp.error_estimate);
  return rep;
}

double predicted_error(const Rule& rule, double ell, double c) {
  if (!(c > 0.0 && c < 1.0))
    throw Error(ErrorKind::Parameter, "cost c must lie in (0,1)");
  IndexReport rep = incentivization_index(rule, ell);
  return rep.predicted_error_coeff * std::pow(c, 0.25 * ell);
}

double precision_ratio(const Rule& rule, double ell) {
  double ind_rule = incentivization_index(rule, ell).ind;
  double ind_opt = incentivization_index(optimal_rule(ell), ell).ind;
  return std::pow(ind_opt / ind_rule, 1.0 / ell);
}

}  // namespace precis
