#include "precis/optimal.hpp"

#include <cmath>

#include "doctest.h"
#include "precis/calculus.hpp"

using namespace precis;

TEST_CASE("kappa against high-precision values") {
  struct Pin {
    double ell, kappa;
  };
  // independently computed with 50-digit arithmetic
  const Pin pins[] = {
      {1, 5.2345912183625059436},   {2, 9.1886245788918540155},
      {4, 17.696576835816633636},   {8, 32.915540022268736582},
      {16, 53.133840577713478456},  {32, 72.626181219751234597},
      {128, 96.111172711317953476}, {512, 103.86527466569020077},
  };
  for (const Pin& p : pins) {
    CAPTURE(p.ell);
    CHECK(kappa(p.ell) == doctest::Approx(p.kappa).epsilon(1e-10));
  }
  CHECK_THROWS_AS(kappa(0.5), Error);
  CHECK_THROWS_AS(kappa(std::numeric_limits<double>::infinity()), Error);
  try {
    kappa(0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Spec);
  }
}

TEST_CASE("optimal rules are normalized and proper") {
  for (double ell : {1.0, 2.0, 4.0, 16.0}) {
    CAPTURE(ell);
    Rule r = optimal_rule(ell);
    CHECK(r.normalized());
    CHECK(r.f(0.5) == 0.0);
    CHECK(mean_reward(r) == doctest::Approx(1.0).epsilon(1e-9));
    DiagnosticsReport rep = check_proper(r);
    CHECK(rep.proper);
    CHECK(rep.proper_identity_max_violation < 1e-10);
    // the derivative is continuous across the branch seam at 1/2
    double gap = std::abs(r.f_prime(0.5 - 1e-12) - r.f_prime(0.5 + 1e-12));
    CHECK(gap < 1e-10);
  }
  CHECK(optimal_rule(2.0).name() == "opt:2");
  CHECK_THROWS_AS(optimal_rule(0.99), Error);
}

TEST_CASE("order-2 and order-8 antiderivatives match their closed forms") {
  // ell = 2: f'(x) = kappa_2 x^(1/3) above 1/2, so
  // f(x) = (3/4) kappa_2 (x^(4/3) - 2^(-4/3)).
  Rule g2 = optimal_rule(2.0);
  CHECK(g2.f(0.6) == doctest::Approx(0.7526126930630296).epsilon(1e-9));
  CHECK(g2.f(0.75) == doctest::Approx(1.961104891966523).epsilon(1e-9));
  CHECK(g2.f(0.9) == doctest::Approx(3.253394595280026).epsilon(1e-9));

  // ell = 8: f' = kappa_8 (1-x)^(5/3) below 1/2 and kappa_8 x^(2/3)(1-x)
  // above, so both branches integrate in closed form.
  Rule g8 = optimal_rule(8.0);
  CHECK(g8.f(0.2) == doctest::Approx(-4.863828332260729).epsilon(1e-9));
  CHECK(g8.f(0.4) == doctest::Approx(-1.217128456620126).epsilon(1e-9));
  CHECK(g8.f(0.6) == doctest::Approx(0.9917728841323721).epsilon(1e-9));
  CHECK(g8.f(0.9) == doctest::Approx(2.972133227777661).epsilon(1e-9));

  double k8 = kappa(8.0);
  for (double x : {0.3, 0.45}) {
    CHECK(g8.f_prime(x) ==
          doctest::Approx(k8 * std::pow(1.0 - x, 5.0 / 3.0)).epsilon(1e-12));
  }
  for (double x : {0.55, 0.8}) {
    CHECK(g8.f_prime(x) ==
          doctest::Approx(k8 * std::pow(x, 2.0 / 3.0) * (1.0 - x)).epsilon(1e-12));
  }
}

TEST_CASE("limit rule quartic closed forms") {
  Rule inf = optimal_rule_limit();
  CHECK(inf.name() == "opt:inf");
  CHECK(inf.normalized());
  CHECK(inf.f(0.5) == 0.0);
  CHECK(inf.f(0.75) == doctest::Approx(2.326388888888889).epsilon(1e-14));
  CHECK(inf.f_prime(0.75) == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(inf.reward_second(0.5) == doctest::Approx(80.0 / 3.0));
  CHECK(inf.reward_third(0.3) == doctest::Approx(320.0 / 3.0 * 0.4));
  CHECK(mean_reward(inf) == doctest::Approx(1.0).epsilon(1e-10));
  // the closed-form R agrees with assembling it from f
  for (double p : {0.12, 0.37, 0.5, 0.81}) {
    double assembled = p * inf.f(p) + (1.0 - p) * inf.f(1.0 - p);
    CHECK(inf.reward(p) == doctest::Approx(assembled).epsilon(1e-13));
  }
  CHECK(check_proper(inf).proper);
}

TEST_CASE("phi is the curvature of the optimal rule") {
  Rule g2 = optimal_rule(2.0);
  for (double x : {0.1, 0.35, 0.5, 0.72, 0.94}) {
    CHECK(phi_opt(2.0, x) == doctest::Approx(g2.reward_second(x)).epsilon(1e-13));
    CHECK(phi_opt(2.0, x) == doctest::Approx(phi_opt(2.0, 1.0 - x)).epsilon(1e-13));
  }
  // thin corners: for ell = 16 the curvature decays like x^(2/5) and drops
  // under 1e-3 near the boundary, which the respectfulness probe reports
  CHECK(phi_opt(16.0, 1e-12) ==
        doctest::Approx(kappa(16.0) * std::pow(1e-12, 0.4)).epsilon(1e-12));
  RespectfulCheck rc = check_respectful(optimal_rule(16.0), 0.01);
  CHECK_FALSE(rc.pass);
  CHECK(rc.failed_condition == 1);
  // the deepest violation sits at one of the 1e-12 corner probes
  double corner = std::min(rc.witness_x, 1.0 - rc.witness_x);
  CHECK(corner == doctest::Approx(1e-12).epsilon(1e-3));

  CHECK_THROWS_AS(phi_opt(1.0, 0.0), Error);
  CHECK_THROWS_AS(phi_opt(1.0, 1.0), Error);
  CHECK_THROWS_AS(phi_opt(0.2, 0.5), Error);
}

TEST_CASE("optimal rules flow through build_rule and the grammar") {
  Rule a = build_rule(OptimalSpec{2.0});
  CHECK(a.name() == "opt:2");
  CHECK(a.normalized());
  Rule b = parse_rule("opt:2");
  CHECK(b.f(0.75) == doctest::Approx(a.f(0.75)).epsilon(1e-12));
  Rule c = parse_rule("opt:inf");
  CHECK(c.name() == "opt:inf");
  CHECK_THROWS_AS(parse_rule("opt:0.5"), Error);
  CHECK_THROWS_AS(parse_rule("opt:2:respectful"), Error);
  CHECK_THROWS_AS(parse_rule("opt:2:nonsense:0.1"), Error);
}
