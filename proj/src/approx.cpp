#include "precis/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>

#include "precis/format.hpp"
#include "precis/quadrature.hpp"

namespace precis {

namespace {

constexpr int kDeCasteljauCutoff = 128;
constexpr int kDegreeCap = 4096;
constexpr int kEmissionGate = 32;     // "poly:" emission
constexpr int kRecoveryCeiling = 64;  // even_series hard refusal

void validate_clamp(const PhiClamp& clamp) {
  const double center = phi_opt(clamp.ell, 0.5);  // also validates ell
  const double cap = std::min(0.5, center);
  if (!(clamp.eps > 0.0 && clamp.eps < cap))
    throw Error(ErrorKind::Parameter, "clamp eps must lie in (0, " +
                                          fmt_compact(cap) + "), got " +
                                          fmt_compact(clamp.eps));
}

}  // namespace

double clamped_phi(const PhiClamp& clamp, double x) {
  validate_clamp(clamp);
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(ErrorKind::Domain, "clamped_phi needs x in [0,1]");
  return phi_opt(clamp.ell, std::clamp(x, clamp.eps, 1.0 - clamp.eps));
}

BernsteinPoly::BernsteinPoly(std::vector<double> coefficients)
    : c_(std::move(coefficients)) {
  if (c_.empty())
    throw Error(ErrorKind::Parameter,
                "Bernstein polynomial needs at least one coefficient");
  for (double v : c_)
    if (!std::isfinite(v))
      throw Error(ErrorKind::Parameter, "non-finite Bernstein coefficient");
}

BernsteinPoly BernsteinPoly::fit(const std::function<double(double)>& fn,
                                 int degree) {
  if (degree < 1)
    throw Error(ErrorKind::Parameter, "Bernstein fit needs degree >= 1");
  std::vector<double> c(degree + 1);
  for (int i = 0; i <= degree; ++i) {
    c[i] = fn(static_cast<double>(i) / degree);
    if (!std::isfinite(c[i]))
      throw Error(ErrorKind::Parameter,
                  "non-finite sample at Bernstein node " +
                      fmt_compact(static_cast<double>(i) / degree));
  }
  return BernsteinPoly(std::move(c));
}

BernsteinPoly BernsteinPoly::fit_symmetric(
    const std::function<double(double)>& fn, int degree) {
  if (degree < 1)
    throw Error(ErrorKind::Parameter, "Bernstein fit needs degree >= 1");
  std::vector<double> c(degree + 1);
  for (int i = 0; 2 * i <= degree; ++i) {
    const double v = fn(static_cast<double>(i) / degree);
    if (!std::isfinite(v))
      throw Error(ErrorKind::Parameter,
                  "non-finite sample at Bernstein node " +
                      fmt_compact(static_cast<double>(i) / degree));
    c[i] = v;
    c[degree - i] = v;
  }
  return BernsteinPoly(std::move(c));
}

double BernsteinPoly::min_coefficient() const {
  return *std::min_element(c_.begin(), c_.end());
}

double BernsteinPoly::eval_pair(double t, double s) const {
  const int n = degree();
  if (n == 0) return c_[0];
  if (t == 0.0) return c_.front();
  if (s == 0.0) return c_.back();
  if (n <= kDeCasteljauCutoff) {
    double w[kDeCasteljauCutoff + 1];
    std::copy(c_.begin(), c_.end(), w);
    for (int len = n; len >= 1; --len)
      for (int i = 0; i < len; ++i) w[i] = s * w[i] + t * w[i + 1];
    return w[0];
  }
  if (!(t > 0.0 && s > 0.0))
    throw Error(ErrorKind::Domain,
                "high-degree Bernstein evaluation needs x in [0,1]");
  // Renormalized weight window about the mode floor((n+1)t); the ratio
  // recurrence keeps every weight relative to the mode's, and dividing by
  // the window sum restores the partition of unity.
  const double ratio = t / s;
  const int mode = std::min(n, static_cast<int>((n + 1.0) * t));
  const int halfwidth =
      static_cast<int>(12.0 * std::sqrt(static_cast<double>(n) * t * s)) + 30;
  const int lo = std::max(0, mode - halfwidth);
  const int hi = std::min(n, mode + halfwidth);
  double sumw = 1.0, acc = c_[mode], w = 1.0;
  for (int i = mode; i < hi; ++i) {
    w *= ratio * static_cast<double>(n - i) / static_cast<double>(i + 1);
    sumw += w;
    acc += w * c_[i + 1];
  }
  w = 1.0;
  for (int i = mode; i > lo; --i) {
    w *= static_cast<double>(i) / (ratio * static_cast<double>(n - i + 1));
    sumw += w;
    acc += w * c_[i - 1];
  }
  return acc / sumw;
}

BernsteinPoly BernsteinPoly::derivative() const {
  const int n = degree();
  if (n == 0) return BernsteinPoly({0.0});
  std::vector<double> d(n);
  for (int i = 0; i < n; ++i) d[i] = n * (c_[i + 1] - c_[i]);
  return BernsteinPoly(std::move(d));
}

BernsteinPoly BernsteinPoly::antiderivative() const {
  const int n = degree();
  std::vector<double> a(n + 2);
  a[0] = 0.0;
  for (int i = 0; i <= n; ++i) a[i + 1] = a[i] + c_[i] / (n + 1);
  return BernsteinPoly(std::move(a));
}

BernsteinPoly BernsteinPoly::times_one_minus_x() const {
  const int n = degree();
  std::vector<double> e(n + 2);
  for (int i = 0; i <= n; ++i)
    e[i] = c_[i] * static_cast<double>(n + 1 - i) / (n + 1);
  e[n + 1] = 0.0;
  return BernsteinPoly(std::move(e));
}

std::vector<double> even_series(const BernsteinPoly& p) {
  const int n = p.degree();
  if (n > kRecoveryCeiling)
    throw Error(ErrorKind::Parameter,
                "even-series recovery is limited to degree <= 64, got " +
                    std::to_string(n));
  // Fit q(sigma), sigma = (2u)^2 in [0,1], to the symmetric part at
  // Chebyshev sigma-nodes, then undo the scaling: u^(2j) carries 4^j.
  const int cnt = n / 2 + 1;
  std::vector<long double> a(static_cast<size_t>(cnt) * cnt), y(cnt);
  for (int k = 0; k < cnt; ++k) {
    const double sigma =
        0.5 * (1.0 - std::cos(std::numbers::pi * (k + 0.5) / cnt));
    const double u = 0.5 * std::sqrt(sigma);
    const double above = p.eval_pair(0.5 + u, 0.5 - u);
    const double below = p.eval_pair(0.5 - u, 0.5 + u);
    y[k] = 0.5L * (static_cast<long double>(above) + below);
    long double pw = 1.0L;
    for (int j = 0; j < cnt; ++j) {
      a[static_cast<size_t>(k) * cnt + j] = pw;
      pw *= sigma;
    }
  }
  for (int col = 0; col < cnt; ++col) {  // elimination, partial pivoting
    int piv = col;
    for (int r = col + 1; r < cnt; ++r)
      if (std::fabs(a[static_cast<size_t>(r) * cnt + col]) >
          std::fabs(a[static_cast<size_t>(piv) * cnt + col]))
        piv = r;
    if (a[static_cast<size_t>(piv) * cnt + col] == 0.0L)
      throw Error(ErrorKind::NonConvergence, "singular even-series system");
    if (piv != col) {
      for (int j = col; j < cnt; ++j)
        std::swap(a[static_cast<size_t>(piv) * cnt + j],
                  a[static_cast<size_t>(col) * cnt + j]);
      std::swap(y[piv], y[col]);
    }
    for (int r = col + 1; r < cnt; ++r) {
      const long double m = a[static_cast<size_t>(r) * cnt + col] /
                            a[static_cast<size_t>(col) * cnt + col];
      for (int j = col; j < cnt; ++j)
        a[static_cast<size_t>(r) * cnt + j] -=
            m * a[static_cast<size_t>(col) * cnt + j];
      y[r] -= m * y[col];
    }
  }
  std::vector<long double> sol(cnt);
  for (int r = cnt - 1; r >= 0; --r) {
    long double acc = y[r];
    for (int j = r + 1; j < cnt; ++j)
      acc -= a[static_cast<size_t>(r) * cnt + j] * sol[j];
    sol[r] = acc / a[static_cast<size_t>(r) * cnt + r];
  }
  std::vector<double> q(cnt);
  long double scale = 1.0L;
  for (int j = 0; j < cnt; ++j) {
    q[j] = static_cast<double>(sol[j] * scale);
    scale *= 4.0L;
  }
  return q;
}

double curvature_normalizer(const BernsteinPoly& p) {
  const BernsteinPoly h =
      p.times_one_minus_x().times_one_minus_x().antiderivative();
  return h.coefficients().back() - h.eval_pair(0.5, 0.5);
}

namespace {

class BernsteinRuleCore final : public RuleCore {
 public:
  explicit BernsteinRuleCore(BernsteinPoly p)
      : p_(std::move(p)),
        dp_(p_.derivative()),
        fint_(p_.times_one_minus_x().antiderivative()),
        z_(curvature_normalizer(p_)),
        f_half_(fint_.eval_pair(0.5, 0.5)) {}

  double f(double x) const override { return (fint_(x) - f_half_) / z_; }
  double f_prime(double x) const override {
    return (1.0 - x) * p_(x) / z_;
  }
  double reward_second(double x) const override { return p_(x) / z_; }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override { return dp_(x) / z_; }

 private:
  BernsteinPoly p_, dp_, fint_;
  double z_, f_half_;
};

std::shared_ptr<const BernsteinRuleCore> make_curvature_core(
    const BernsteinPoly& p) {
  const double lo = p.min_coefficient();
  if (!(lo > 0.0))
    throw Error(ErrorKind::Spec,
                "curvature profile must be positive at every Bernstein node "
                "(min coefficient " +
                    fmt_compact(lo) + ")");
  return std::make_shared<const BernsteinRuleCore>(p);
}

// Index of the rule R'' = p/Z without assembling the rule:
// Z^(ell/4) * integral (x(1-x)/p)^(ell/4), halved and doubled by symmetry.
double curvature_index(const BernsteinPoly& p, double ell, double z) {
  const auto integrand = [&](double x) {
    return std::pow(x * (1.0 - x) / p(x), ell / 4.0);
  };
  const QuadResult half = integrate_open(integrand, 0.5, 1.0, 1e-9);
  return std::pow(z, ell / 4.0) * 2.0 * half.value;
}

}  // namespace

Rule rule_from_curvature(const BernsteinPoly& p, std::string name) {
  return Rule(make_curvature_core(p), HalfDerivativeTableSpec{},
              std::move(name), 1.0, 0.0, true);
}

std::pair<Rule, PolynomialRuleReport> build_polynomial_rule(double ell,
                                                            double eps,
                                                            int degree) {
  const PhiClamp clamp{ell, eps};
  validate_clamp(clamp);
  if (degree < 0 || degree > kDegreeCap)
    throw Error(ErrorKind::Parameter,
                "degree must be 1..4096, or 0 for automatic selection");
  const auto target = [clamp](double x) { return clamped_phi(clamp, x); };

  std::optional<BernsteinPoly> chosen;
  double stab_gap = std::numeric_limits<double>::quiet_NaN();
  if (degree > 0) {
    chosen = BernsteinPoly::fit_symmetric(target, degree);
  } else {
    const double tol = std::max(1e-4, eps / 64.0);
    double prev = 0.0;
    double last_gap = std::numeric_limits<double>::quiet_NaN();
    for (int n = 16; n <= kDegreeCap; n *= 2) {
      BernsteinPoly cand = BernsteinPoly::fit_symmetric(target, n);
      const double ind = curvature_index(cand, ell, curvature_normalizer(cand));
      if (n > 16) {
        last_gap = std::fabs(ind - prev) / ind;
        if (last_gap <= tol) {
          chosen.emplace(std::move(cand));
          stab_gap = last_gap;
          break;
        }
      }
      prev = ind;
    }
    if (!chosen)
      throw ApproximationError(
          "index did not stabilize by degree 4096 for eps = " +
              fmt_compact(eps),
          last_gap);
  }

  const BernsteinPoly& p = *chosen;
  PolynomialRuleReport rep;
  rep.degree = p.degree();
  rep.ell = ell;
  rep.eps = eps;
  rep.normalizer = curvature_normalizer(p);
  rep.lower_bound = p.min_coefficient();
  rep.stabilization_gap = stab_gap;

  double grid_min = std::numeric_limits<double>::infinity(), sup_gap = 0.0;
  for (double x : chebyshev_interior_grid(2049)) {
    const double pv = p(x);
    grid_min = std::min(grid_min, pv);
    sup_gap = std::max(sup_gap, std::fabs(pv - target(x)));
  }
  rep.grid_min = grid_min;
  rep.sup_gap = sup_gap;

  double odd = 0.0;
  for (int j = 1; j < 1024; ++j) {
    const double u = j / 2048.0;  // 1/2 +- u are exact dyadic complements
    odd = std::max(odd, 0.5 * std::fabs(p.eval_pair(0.5 + u, 0.5 - u) -
                                        p.eval_pair(0.5 - u, 0.5 + u)));
  }
  rep.odd_content = odd;

  RuleSpec spec = HalfDerivativeTableSpec{};
  if (p.degree() <= kEmissionGate) {
    std::vector<double> q = even_series(p);
    for (double& v : q) v /= rep.normalizer;
    std::string text = "poly:";
    for (size_t j = 0; j < q.size(); ++j) {
      if (j) text += ',';
      text += fmt_compact(q[j]);
    }
    rep.even_coefficients = q;
    rep.spec_string = std::move(text);
    spec = PolynomialEvenSeriesSpec{std::move(q)};
  }

  Rule rule(make_curvature_core(p), std::move(spec),
            "opt:" + fmt_compact(ell) + ":respectful:" + fmt_compact(eps),
            1.0, 0.0, true);
  rep.index = incentivization_index(rule, ell);
  return {std::move(rule), std::move(rep)};
}

Rule build_respectful_rule(double ell, double eps) {
  return build_polynomial_rule(ell, eps, 0).first;
}

}  // namespace precis
