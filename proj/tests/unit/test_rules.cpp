#include "precis/rules.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "precis/quadrature.hpp"

using namespace precis;

namespace {

Rule builtin(BuiltinKind k) { return build_rule(BuiltinSpec{k}); }

// Rules cheap enough to sweep over grids in the property tests.
std::vector<Rule> property_rules() {
  std::vector<Rule> rules{
      builtin(BuiltinKind::Log),
      builtin(BuiltinKind::Quad),
      builtin(BuiltinKind::Sph),
      builtin(BuiltinKind::Hs),
      build_rule(TsallisSpec{1.5}),
      build_rule(TsallisSpec{3.0}),
      build_rule(PolynomialEvenSeriesSpec{{6.0, -3.0}}),
  };
  rules.push_back(rule_from_half_derivative([](double) { return 1.0; },
                                            Side::Left, 0.5, "flat-left"));
  rules.push_back(build_rule(HalfDerivativeTableSpec{
      {0.5, 0.6, 0.7, 0.8, 0.9}, {1.0, 0.8, 0.9, 2.0, 0.5}}));
  return rules;
}

}  // namespace

TEST_CASE("builtin closed forms at pinned points") {
  Rule log_r = builtin(BuiltinKind::Log);
  CHECK(log_r.f(0.5) == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(log_r.f_prime(0.5) == doctest::Approx(2.0));
  CHECK(log_r.reward(0.5) == doctest::Approx(-std::log(2.0)));
  CHECK(log_r.reward_second(0.5) == doctest::Approx(4.0));
  CHECK(log_r.reward_second(0.75) == doctest::Approx(16.0 / 3.0));
  CHECK(log_r.reward_third(0.75) == doctest::Approx(0.5 / (0.5625 * 0.0625)));

  Rule quad = builtin(BuiltinKind::Quad);
  CHECK(quad.f(0.5) == doctest::Approx(0.5));
  CHECK(quad.f(0.75) == doctest::Approx(0.875));
  CHECK(quad.f_prime(0.75) == doctest::Approx(1.0));
  CHECK(quad.reward(0.75) == doctest::Approx(0.625));
  CHECK(quad.reward_second(0.31) == doctest::Approx(4.0));
  CHECK(quad.reward_third(0.31) == doctest::Approx(0.0));

  Rule sph = builtin(BuiltinKind::Sph);
  CHECK(sph.f(0.5) == doctest::Approx(std::sqrt(0.5)));
  CHECK(sph.f_prime(0.5) == doctest::Approx(std::sqrt(2.0)));
  CHECK(sph.reward(0.75) == doctest::Approx(std::sqrt(0.625)));
  CHECK(sph.reward_second(0.5) == doctest::Approx(2.0 * std::sqrt(2.0)));

  Rule hs = builtin(BuiltinKind::Hs);
  CHECK(hs.f(0.5) == doctest::Approx(-1.0));
  CHECK(hs.f(0.8) == doctest::Approx(-0.5));
  CHECK(hs.f_prime(0.5) == doctest::Approx(2.0));
  CHECK(hs.reward(0.5) == doctest::Approx(-1.0));
  CHECK(hs.reward_second(0.5) == doctest::Approx(4.0));
}

TEST_CASE("tsallis family: gamma = 2 is quad, gamma = 3 pinned") {
  Rule t2 = build_rule(TsallisSpec{2.0});
  Rule quad = builtin(BuiltinKind::Quad);
  for (double x : {0.1, 0.3, 0.5, 0.62, 0.97}) {
    CHECK(t2.f(x) == doctest::Approx(quad.f(x)).epsilon(1e-14));
    CHECK(t2.f_prime(x) == doctest::Approx(quad.f_prime(x)).epsilon(1e-14));
    CHECK(t2.reward_second(x) == doctest::Approx(4.0));
    CHECK(t2.reward_third(x) == doctest::Approx(0.0));
  }

  Rule t3 = build_rule(TsallisSpec{3.0});
  CHECK(t3.f(0.5) == doctest::Approx(0.25));  // 2^(1-gamma)
  CHECK(t3.reward(0.4) == doctest::Approx(std::pow(0.4, 3) + std::pow(0.6, 3)));
  // R(p) = p^3 + (1-p)^3 has constant R'' = 6.
  CHECK(t3.reward_second(0.21) == doctest::Approx(6.0));
  CHECK(t3.reward_third(0.21) == doctest::Approx(0.0));

  CHECK_THROWS_AS(build_rule(TsallisSpec{1.0}), Error);
  CHECK_THROWS_AS(build_rule(TsallisSpec{0.5}), Error);
  try {
    build_rule(TsallisSpec{1.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Spec);
  }
}

TEST_CASE("properness identity, symmetry, and the derivative fact") {
  auto grid = chebyshev_interior_grid(201);
  for (const Rule& r : property_rules()) {
    CAPTURE(r.name());
    double prev_rp = -std::numeric_limits<double>::infinity();
    for (double x : grid) {
      double fp = r.f_prime(x);
      double fpm = r.f_prime(1.0 - x);
      // x f'(x) = (1-x) f'(1-x)
      CHECK(std::abs(x * fp - (1.0 - x) * fpm) <=
            1e-9 * std::max(1.0, std::abs(x * fp)));
      CHECK(fp > 0.0);
      // R'' = f'(x) + f'(1-x) for proper rules
      double r2 = r.reward_second(x);
      CHECK(r2 == doctest::Approx(fp + fpm).epsilon(1e-9));
      // R symmetric, R' antisymmetric
      CHECK(r.reward(x) == doctest::Approx(r.reward(1.0 - x)).epsilon(1e-12));
      CHECK(r.reward_prime(x) ==
            doctest::Approx(-r.reward_prime(1.0 - x)).epsilon(1e-11));
      // R convex: R' nondecreasing along the grid
      double rp = r.reward_prime(x);
      CHECK(rp >= prev_rp - 1e-12 * std::max(1.0, std::abs(rp)));
      prev_rp = rp;
    }
    CHECK(std::abs(r.reward_prime(0.5)) <= 1e-12);
  }
}

TEST_CASE("closed-form R''' agrees with central differences") {
  std::vector<Rule> rules{builtin(BuiltinKind::Log), builtin(BuiltinKind::Sph),
                          builtin(BuiltinKind::Hs), build_rule(TsallisSpec{2.5}),
                          build_rule(PolynomialEvenSeriesSpec{{6.0, -3.0, 1.0}})};
  for (const Rule& r : rules) {
    CAPTURE(r.name());
    REQUIRE(r.has_reward_third());
    for (double x : {0.2, 0.35, 0.5, 0.65, 0.8}) {
      double h = 1e-5;
      double fd = (r.reward_second(x + h) - r.reward_second(x - h)) / (2.0 * h);
      CHECK(r.reward_third(x) ==
            doctest::Approx(fd).epsilon(1e-6).scale(std::max(1.0, std::abs(fd))));
    }
  }
}

TEST_CASE("evaluate bundles the pointwise quantities") {
  Rule sph = builtin(BuiltinKind::Sph);
  for (double x : {0.25, 0.5, 0.9}) {
    Evaluation ev = sph.evaluate(x);
    CHECK(ev.f == sph.f(x));
    CHECK(ev.f_prime == sph.f_prime(x));
    CHECK(ev.R == sph.reward(x));
    CHECK(ev.R_prime == sph.reward_prime(x));
    CHECK(ev.R_second == sph.reward_second(x));
  }
}

TEST_CASE("domain errors outside (0,1)") {
  Rule quad = builtin(BuiltinKind::Quad);
  for (double x : {0.0, 1.0, -0.5, 1.5,
                   std::numeric_limits<double>::quiet_NaN()}) {
    CAPTURE(x);
    CHECK_THROWS_AS(quad.f(x), Error);
    CHECK_THROWS_AS(quad.reward(x), Error);
    CHECK_THROWS_AS(quad.evaluate(x), Error);
  }
  try {
    quad.f(0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("affine rescaling") {
  Rule quad = builtin(BuiltinKind::Quad);
  Rule n = quad.rescaled(6.0, -3.0, true);
  CHECK(n.normalized());
  CHECK(n.scale() == doctest::Approx(6.0));
  CHECK(n.shift() == doctest::Approx(-3.0));
  CHECK(n.f(0.5) == doctest::Approx(0.0));
  CHECK(n.f(0.75) == doctest::Approx(2.25));
  CHECK(n.reward(0.5) == doctest::Approx(0.0));
  CHECK(n.reward_second(0.3) == doctest::Approx(24.0));
  CHECK(n.reward_prime(0.75) == doctest::Approx(6.0));  // shift cancels
  CHECK(n.name() == quad.name());
  CHECK_THROWS_AS(quad.rescaled(-1.0, 0.0, false), Error);
  CHECK_THROWS_AS(quad.rescaled(0.0, 0.0, false), Error);

  Rule renamed = quad.renamed("brier");
  CHECK(renamed.name() == "brier");
  CHECK(renamed.f(0.75) == quad.f(0.75));
}

TEST_CASE("half-derivative extension reproduces a known closed form") {
  // h = 1 on (0,1/2], f(1/2) = 1/2: integrating the mirrored derivative
  // gives f(x) = x below 1/2 and f(x) = ln x - x + 1 + ln 2 above.
  Rule r = rule_from_half_derivative([](double) { return 1.0; }, Side::Left,
                                     0.5, "flat-left");
  CHECK(r.f_prime(0.3) == doctest::Approx(1.0));
  CHECK(r.f_prime(0.75) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(r.f(0.3) == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(r.f(0.75) ==
        doctest::Approx(std::log(0.75) - 0.75 + 1.0 + std::log(2.0)).epsilon(1e-10));
  CHECK(r.f(0.5) == doctest::Approx(0.5));
  CHECK(r.reward_second(0.6) == doctest::Approx((1.0 / 0.6 - 1.0) / 0.4).epsilon(1e-12));
  CHECK_FALSE(r.has_reward_third());
  // numeric R''' still works through differences of R''
  CHECK(std::isfinite(r.reward_third(0.7)));

  // A negative half-derivative violates weak properness outright.
  CHECK_THROWS_AS(
      rule_from_half_derivative([](double) { return -1.0; }, Side::Left),
      Error);
  try {
    rule_from_half_derivative([](double) { return -1.0; }, Side::Right);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Spec);
  }
}

TEST_CASE("table rules interpolate their samples") {
  HalfDerivativeTableSpec tb{{0.5, 0.6, 0.7, 0.8, 0.9},
                             {1.0, 0.8, 0.9, 2.0, 0.5}};
  Rule r = build_rule(tb);
  for (std::size_t i = 0; i < tb.x.size(); ++i)
    CHECK(r.f_prime(tb.x[i]) == doctest::Approx(tb.h[i]).epsilon(1e-13));
  // constant beyond the grid
  CHECK(r.f_prime(0.95) == doctest::Approx(0.5));
  CHECK(r.f_prime(0.99) == doctest::Approx(0.5));
  // mirrored to the left half
  CHECK(r.f_prime(0.4) == doctest::Approx(0.6 / 0.4 * 0.8).epsilon(1e-13));
  // shape-preserving interpolation stays within the data hull per cell
  double mid = r.f_prime(0.55);
  CHECK(mid >= 0.8);
  CHECK(mid <= 1.0);
  CHECK(r.f(0.5) == doctest::Approx(0.0));

  DiagnosticsReport rep = check_proper(r);
  CHECK(rep.proper);
  CHECK(rep.proper_identity_max_violation < 1e-10);
}

TEST_CASE("table spec invariants") {
  using T = HalfDerivativeTableSpec;
  CHECK_THROWS_AS(build_rule(T{{}, {}}), Error);
  CHECK_THROWS_AS(build_rule(T{{0.5, 0.6}, {1.0}}), Error);
  CHECK_THROWS_AS(build_rule(T{{0.6, 0.5}, {1.0, 1.0}}), Error);       // not increasing
  CHECK_THROWS_AS(build_rule(T{{0.4, 0.6}, {1.0, 1.0}}), Error);       // below 1/2
  CHECK_THROWS_AS(build_rule(T{{0.5, 1.0}, {1.0, 1.0}}), Error);       // reaches 1
  CHECK_THROWS_AS(build_rule(T{{0.5, 0.6}, {1.0, -0.1}}), Error);      // negative
  CHECK_THROWS_AS(build_rule(T{{0.5, 0.6}, {0.0, 0.0}}), Error);       // all zero
  // single positive sample is fine: a constant h
  Rule r = build_rule(T{{0.5}, {2.0}});
  CHECK(r.f_prime(0.8) == doctest::Approx(2.0));
  CHECK(r.f_prime(0.2) == doctest::Approx(0.8 / 0.2 * 2.0));
}

TEST_CASE("polynomial even series closed forms") {
  // d = {4}: R'' = 4 everywhere, f' identical to quad, f anchored at 0.
  Rule p4 = build_rule(PolynomialEvenSeriesSpec{{4.0}});
  Rule quad = builtin(BuiltinKind::Quad);
  for (double x : {0.2, 0.5, 0.77}) {
    CHECK(p4.f_prime(x) == doctest::Approx(quad.f_prime(x)).epsilon(1e-14));
    CHECK(p4.f(x) == doctest::Approx(quad.f(x) - 0.5).epsilon(1e-13));
  }
  CHECK(p4.f(0.75) == doctest::Approx(0.375));

  Rule p = build_rule(PolynomialEvenSeriesSpec{{6.0, -3.0}});
  CHECK(p.name() == "poly:6,-3");
  CHECK(p.reward_second(0.75) == doctest::Approx(6.0 - 3.0 * 0.0625));
  CHECK(p.reward_third(0.75) == doctest::Approx(-1.5));
  CHECK(p.f_prime(0.75) == doctest::Approx(0.25 * 5.8125).epsilon(1e-14));
  CHECK(p.f(0.5) == doctest::Approx(0.0));

  CHECK_THROWS_AS(build_rule(PolynomialEvenSeriesSpec{{}}), Error);
  CHECK_THROWS_AS(build_rule(PolynomialEvenSeriesSpec{{0.0, 0.0}}), Error);
  CHECK_THROWS_AS(build_rule(PolynomialEvenSeriesSpec{{1.0, -50.0}}), Error);
  CHECK_THROWS_AS(
      build_rule(PolynomialEvenSeriesSpec{
          {1.0, std::numeric_limits<double>::infinity()}}),
      Error);
}

TEST_CASE("rule grammar") {
  CHECK(parse_rule("log").name() == "log");
  CHECK(parse_rule("  QUAD ").name() == "quad");
  CHECK(parse_rule("sph").name() == "sph");
  CHECK(parse_rule("hs").name() == "hs");
  CHECK(parse_rule("tsallis:2.5").name() == "tsallis:2.5");
  CHECK(parse_rule("poly:4").name() == "poly:4");
  CHECK(parse_rule("poly:6,-3").reward_second(0.5) == doctest::Approx(6.0));

  for (const char* bad : {"", "frob", "tsallis", "tsallis:abc", "tsallis:0.5",
                          "poly:", "poly:1,2,x", "opt", "log:2", "quad:extra"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_rule(bad), Error);
  }
  try {
    parse_rule("table:/nonexistent/file.csv");
    FAIL("expected an Io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("table files parse with headers and comments") {
  const char* path = "/tmp/precis_test_table.csv";
  {
    std::ofstream out(path);
    out << "# half derivative samples\n";
    out << "x,h\n";
    out << "0.5, 1.0\n";
    out << "0.7\t1.4\n";
    out << "0.9;0.2\n";
  }
  Rule r = parse_rule(std::string("table:") + path);
  CHECK(r.name() == std::string("table:") + path);
  CHECK(r.f_prime(0.7) == doctest::Approx(1.4).epsilon(1e-13));
  CHECK(r.f_prime(0.95) == doctest::Approx(0.2));
  std::remove(path);
}

TEST_CASE("check_proper accepts the builtins and flags a broken core") {
  for (BuiltinKind k : {BuiltinKind::Log, BuiltinKind::Quad, BuiltinKind::Sph,
                        BuiltinKind::Hs}) {
    Rule r = builtin(k);
    CAPTURE(r.name());
    DiagnosticsReport rep = check_proper(r);
    CHECK(rep.proper);
    CHECK(rep.proper_identity_max_violation < 1e-10);
    CHECK(rep.fprime_min > 0.0);
    CHECK(rep.fprime_nonpositive_fraction == 0.0);
    CHECK(rep.r2_min > 0.0);
    CHECK(std::isnan(rep.normalized_residuals.mean_reward));
  }
  DiagnosticsReport quad_rep = check_proper(builtin(BuiltinKind::Quad));
  CHECK(quad_rep.r2_min == doctest::Approx(4.0));
  CHECK(quad_rep.r2_max == doctest::Approx(4.0));
  CHECK(quad_rep.normalized_residuals.f_half == doctest::Approx(0.5));

  // f(x) = x^2 is increasing but not proper: x f'(x) != (1-x) f'(1-x).
  struct BadCore final : RuleCore {
    double f(double x) const override { return x * x; }
    double f_prime(double x) const override { return 2.0 * x; }
  };
  Rule bad(std::make_shared<BadCore>(), HalfDerivativeTableSpec{}, "xsq");
  DiagnosticsReport rep = check_proper(bad);
  CHECK_FALSE(rep.proper);
  CHECK(rep.proper_identity_max_violation > 0.1);

  CHECK_THROWS_AS(check_proper(builtin(BuiltinKind::Quad), 2), Error);
}

TEST_CASE("respectfulness checks") {
  Rule quad = builtin(BuiltinKind::Quad);
  for (double c : {0.4, 0.1, 1e-4}) {
    RespectfulCheck rc = check_respectful(quad, c);
    CAPTURE(c);
    CHECK(rc.pass);
    CHECK(rc.failed_condition == 0);
  }
  Rule log_r = builtin(BuiltinKind::Log);
  for (double c : {0.1, 0.01, 1e-4}) {
    CHECK(check_respectful(log_r, c).pass);
  }

  // hs has the steepest R'''/R'' ratio of the builtins; at small cost the
  // admissible window grows faster than the damping and condition 3 trips
  // near its left edge.
  RespectfulCheck hs_rc = check_respectful(builtin(BuiltinKind::Hs), 1e-4);
  CHECK_FALSE(hs_rc.pass);
  CHECK(hs_rc.failed_condition == 3);
  CHECK(hs_rc.witness_x > std::pow(1e-4, 0.29) - 1e-9);
  CHECK(hs_rc.witness_x < 0.12);
  CHECK(check_respectful(builtin(BuiltinKind::Hs), 0.01).pass);

  CHECK_THROWS_AS(check_respectful(quad, 0.0), Error);
  CHECK_THROWS_AS(check_respectful(quad, 1.0), Error);
  CHECK_THROWS_AS(check_respectful(quad, 0.1, 0.4), Error);
  CHECK_THROWS_AS(check_respectful(quad, 0.1, 0.25), Error);
}
