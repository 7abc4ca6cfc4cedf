#include "precis/optimal.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "precis/format.hpp"
#include "precis/quadrature.hpp"

namespace precis {

namespace {

void require_order(double ell) {
  if (!std::isfinite(ell) || !(ell >= 1.0))
    throw Error(ErrorKind::Spec,
                "optimal-rule order must satisfy ell >= 1, got " + fmt_compact(ell));
}

double opt_fprime(double ell, double kap, double x) {
  double d = ell + 4.0;
  if (x >= 0.5)
    return kap * std::pow(x, ell / d) * std::pow(1.0 - x, (2.0 * ell - 4.0) / d);
  return kap * std::pow(x, (ell - 8.0) / d) * std::pow(1.0 - x, (2.0 * ell + 4.0) / d);
}

double phi_with_kappa(double ell, double kap, double x) {
  double d = ell + 4.0;
  double lo = std::min(x, 1.0 - x), hi = std::max(x, 1.0 - x);
  return kap * std::pow(lo, (ell - 8.0) / d) * std::pow(hi, ell / d);
}

class OptimalRuleCore final : public RuleCore {
 public:
  OptimalRuleCore(double ell, double kap)
      : ell_(ell),
        kappa_(kap),
        anti_(std::make_shared<GradedAntiderivative>(
            [ell, kap](double x) { return opt_fprime(ell, kap, x); }, 0.5)) {}

  double f(double x) const override { return (*anti_)(x); }
  double f_prime(double x) const override { return opt_fprime(ell_, kappa_, x); }
  double reward_second(double x) const override {
    return phi_with_kappa(ell_, kappa_, x);
  }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    // Branchwise phi' = phi (a/x - b/(1-x)) with (a, b) the exponents of x
    // and 1-x. phi has a symmetric kink at 1/2; report the odd-symmetric
    // value 0 there.
    if (x == 0.5) return 0.0;
    double d = ell_ + 4.0, a, b;
    if (x < 0.5) {
      a = (ell_ - 8.0) / d;
      b = ell_ / d;
    } else {
      a = ell_ / d;
      b = (ell_ - 8.0) / d;
    }
    return phi_with_kappa(ell_, kappa_, x) * (a / x - b / (1.0 - x));
  }

 private:
  double ell_, kappa_;
  std::shared_ptr<GradedAntiderivative> anti_;
};

// Quartic limit rule; everything in closed form.
class OptimalLimitCore final : public RuleCore {
 public:
  double f(double x) const override {
    return (5.0 / 9.0) *
           (((48.0 * x - 128.0) * x + 96.0) * x * x - 11.0);
  }
  double f_prime(double x) const override {
    double q = 1.0 - x;
    return (320.0 / 3.0) * x * q * q;
  }
  double reward(double p) const override {
    return ((-80.0 * p + 160.0) * p * p * p - 80.0 * p + 25.0) / 9.0;
  }
  double reward_second(double x) const override {
    return (320.0 / 3.0) * x * (1.0 - x);
  }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    return (320.0 / 3.0) * (1.0 - 2.0 * x);
  }
};

}  // namespace

double kappa(double ell) {
  require_order(ell);
  static std::map<double, double> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(ell);
    if (it != cache.end()) return it->second;
  }
  double p = ell / (ell + 4.0);
  double integral =
      integrate_open([p](double x) { return std::pow(x * std::pow(1.0 - x, 3.0), p); },
                     0.5, 1.0, 1e-12)
          .value;
  double k = 1.0 / integral;
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(ell, k);
  return k;
}

double phi_opt(double ell, double x) {
  require_order(ell);
  if (!(x > 0.0 && x < 1.0))
    throw Error(ErrorKind::Domain, "phi requires x in (0,1)");
  return phi_with_kappa(ell, kappa(ell), x);
}

Rule optimal_rule(double ell) {
  require_order(ell);
  double k = kappa(ell);
  auto core = std::make_shared<OptimalRuleCore>(ell, k);
  return Rule(std::move(core), OptimalSpec{ell}, "opt:" + fmt_compact(ell), 1.0,
              0.0, true);
}

Rule optimal_rule_limit() {
  return Rule(std::make_shared<OptimalLimitCore>(), OptimalLimitSpec{},
              "opt:inf", 1.0, 0.0, true);
}

}  // namespace precis
