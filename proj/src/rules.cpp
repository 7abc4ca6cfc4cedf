#include "precis/rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>

#include "precis/format.hpp"
#include "precis/quadrature.hpp"

namespace precis {

// Defined in optimal.cpp.
Rule optimal_rule(double ell);
Rule optimal_rule_limit();
// Defined in approx.cpp.
Rule build_respectful_rule(double ell, double eps);

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_interior(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0))
    throw Error(ErrorKind::Domain, std::string(what) + " must lie in (0,1), got " + fmt_compact(x));
}

}  // namespace

double RuleCore::reward(double p) const {
  return p * f(p) + (1.0 - p) * f(1.0 - p);
}

double RuleCore::reward_second(double x) const { return f_prime(x) / (1.0 - x); }

double RuleCore::reward_third(double) const {
  throw Error(ErrorKind::State, "rule has no closed-form R'''");
}

Rule::Rule(std::shared_ptr<const RuleCore> core, RuleSpec spec, std::string name,
           double a, double b, bool normalized)
    : core_(std::move(core)),
      spec_(std::move(spec)),
      name_(std::move(name)),
      a_(a),
      b_(b),
      normalized_(normalized) {}

double Rule::f(double x) const {
  require_interior(x, "report x");
  return a_ * core_->f(x) + b_;
}

double Rule::f_prime(double x) const {
  require_interior(x, "report x");
  return a_ * core_->f_prime(x);
}

double Rule::reward(double p) const {
  require_interior(p, "probability p");
  return a_ * core_->reward(p) + b_;
}

double Rule::reward_prime(double x) const {
  require_interior(x, "report x");
  return a_ * (core_->f(x) - core_->f(1.0 - x));
}

double Rule::reward_second(double x) const {
  require_interior(x, "report x");
  return a_ * core_->reward_second(x);
}

bool Rule::has_reward_third() const { return core_->has_reward_third(); }

double Rule::reward_third(double x) const {
  require_interior(x, "report x");
  if (core_->has_reward_third()) return a_ * core_->reward_third(x);
  double h = std::min(1e-4, std::min(x, 1.0 - x) / 8.0);
  return (reward_second(x + h) - reward_second(x - h)) / (2.0 * h);
}

Evaluation Rule::evaluate(double x) const {
  require_interior(x, "report x");
  return Evaluation{f(x), f_prime(x), reward(x), reward_prime(x), reward_second(x)};
}

Rule Rule::rescaled(double a2, double b2, bool normalized) const {
  if (!(a2 > 0.0) || !std::isfinite(a2) || !std::isfinite(b2))
    throw Error(ErrorKind::Parameter, "rescale needs a finite positive scale");
  return Rule(core_, spec_, name_, a2 * a_, a2 * b_ + b2, normalized);
}

namespace {

// ---- builtin closed forms --------------------------------------------------

class LogCore final : public RuleCore {
 public:
  double f(double x) const override { return std::log(x); }
  double f_prime(double x) const override { return 1.0 / x; }
  double reward(double p) const override {
    return p * std::log(p) + (1.0 - p) * std::log1p(-p);
  }
  double reward_second(double x) const override { return 1.0 / (x * (1.0 - x)); }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    double q = 1.0 - x;
    return 1.0 / (q * q) - 1.0 / (x * x);
  }
};

class QuadCore final : public RuleCore {
 public:
  double f(double x) const override {
    double q = 1.0 - x;
    return 2.0 * x - (x * x + q * q);
  }
  double f_prime(double x) const override { return 4.0 * (1.0 - x); }
  double reward(double p) const override {
    double q = 1.0 - p;
    return p * p + q * q;
  }
  double reward_second(double) const override { return 4.0; }
  bool has_reward_third() const override { return true; }
  double reward_third(double) const override { return 0.0; }
};

class SphCore final : public RuleCore {
  static double S(double x) {
    double q = 1.0 - x;
    return x * x + q * q;
  }

 public:
  double f(double x) const override { return x / std::sqrt(S(x)); }
  double f_prime(double x) const override {
    return (1.0 - x) * std::pow(S(x), -1.5);
  }
  double reward(double p) const override { return std::sqrt(S(p)); }
  double reward_second(double x) const override { return std::pow(S(x), -1.5); }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    return -3.0 * (2.0 * x - 1.0) * std::pow(S(x), -2.5);
  }
};

// hs(x) = -sqrt((1-x)/x): bounded on the safe side, unbounded penalty near 0.
class HsCore final : public RuleCore {
 public:
  double f(double x) const override { return -std::sqrt((1.0 - x) / x); }
  double f_prime(double x) const override {
    return 0.5 / (x * std::sqrt(x * (1.0 - x)));
  }
  double reward(double p) const override { return -2.0 * std::sqrt(p * (1.0 - p)); }
  double reward_second(double x) const override {
    return 0.5 * std::pow(x * (1.0 - x), -1.5);
  }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    return 0.75 * (2.0 * x - 1.0) * std::pow(x * (1.0 - x), -2.5);
  }
};

class TsallisCore final : public RuleCore {
 public:
  explicit TsallisCore(double gamma) : g_(gamma) {}
  double f(double x) const override {
    return g_ * std::pow(x, g_ - 1.0) -
           (g_ - 1.0) * (std::pow(x, g_) + std::pow(1.0 - x, g_));
  }
  double f_prime(double x) const override {
    double q = 1.0 - x;
    return g_ * (g_ - 1.0) * q * (std::pow(x, g_ - 2.0) + std::pow(q, g_ - 2.0));
  }
  double reward(double p) const override {
    return std::pow(p, g_) + std::pow(1.0 - p, g_);
  }
  double reward_second(double x) const override {
    return g_ * (g_ - 1.0) * (std::pow(x, g_ - 2.0) + std::pow(1.0 - x, g_ - 2.0));
  }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    return g_ * (g_ - 1.0) * (g_ - 2.0) *
           (std::pow(x, g_ - 3.0) - std::pow(1.0 - x, g_ - 3.0));
  }

 private:
  double g_;
};

// ---- even power series for R'' about 1/2 -----------------------------------

class EvenSeriesCore final : public RuleCore {
 public:
  explicit EvenSeriesCore(std::vector<double> d) : d_(std::move(d)) {}

  double f(double x) const override {
    // f(1/2 + u) = sum_j d_j [ (1/2) u^(2j+1)/(2j+1) - u^(2j+2)/(2j+2) ],
    // the antiderivative of f' = (1/2 - u) R''(1/2 + u) with f(1/2) = 0.
    double u = x - 0.5;
    double acc = 0.0, upow = u;
    for (std::size_t j = 0; j < d_.size(); ++j) {
      acc += d_[j] * (0.5 * upow / (2.0 * j + 1.0) - upow * u / (2.0 * j + 2.0));
      upow *= u * u;
    }
    return acc;
  }
  double f_prime(double x) const override { return (1.0 - x) * series(x); }
  double reward_second(double x) const override { return series(x); }
  bool has_reward_third() const override { return true; }
  double reward_third(double x) const override {
    double u = x - 0.5, s = u * u, acc = 0.0;
    for (std::size_t j = d_.size(); j-- > 1;) acc = acc * s + d_[j] * (2.0 * j);
    return acc * u;
  }

 private:
  double series(double x) const {
    double s = (x - 0.5) * (x - 0.5), acc = 0.0;
    for (std::size_t j = d_.size(); j-- > 0;) acc = acc * s + d_[j];
    return acc;
  }
  std::vector<double> d_;
};

// ---- rules rebuilt from a half-derivative ----------------------------------

class HalfDerivativeCore final : public RuleCore {
 public:
  HalfDerivativeCore(std::function<double(double)> fp, double f_half)
      : fp_(std::move(fp)),
        f_half_(f_half),
        anti_(std::make_shared<GradedAntiderivative>(fp_, 0.5)) {}
  double f(double x) const override { return f_half_ + (*anti_)(x); }
  double f_prime(double x) const override { return fp_(x); }

 private:
  std::function<double(double)> fp_;
  double f_half_;
  std::shared_ptr<GradedAntiderivative> anti_;
};

// Monotone (Fritsch-Carlson) cubic through strictly increasing abscissae;
// never overshoots the data on a cell, so nonnegative data stay nonnegative.
// Constant beyond the grid.
struct PchipCurve {
  std::vector<double> x, y, d;

  static PchipCurve build(std::vector<double> xs, std::vector<double> ys) {
    PchipCurve c;
    c.x = std::move(xs);
    c.y = std::move(ys);
    std::size_t n = c.x.size();
    c.d.assign(n, 0.0);
    if (n == 1) return c;
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = c.x[i + 1] - c.x[i];
      s[i] = (c.y[i + 1] - c.y[i]) / h[i];
    }
    if (n == 2) {
      c.d[0] = c.d[1] = s[0];
      return c;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (s[i - 1] == 0.0 || s[i] == 0.0 || (s[i - 1] > 0) != (s[i] > 0)) {
        c.d[i] = 0.0;
      } else {
        double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
        c.d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
      }
    }
    c.d[0] = edge(h[0], h[1], s[0], s[1]);
    c.d[n - 1] = edge(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
    return c;
  }

  double eval(double t) const {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    double h = x[i + 1] - x[i], th = (t - x[i]) / h;
    double t2 = th * th, t3 = t2 * th;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * y[i] + (t3 - 2.0 * t2 + th) * h * d[i] +
           (-2.0 * t3 + 3.0 * t2) * y[i + 1] + (t3 - t2) * h * d[i + 1];
  }

 private:
  // One-sided three-point slope, clipped to keep the end cell monotone.
  static double edge(double h0, double h1, double s0, double s1) {
    double d0 = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d0 * s0 <= 0.0) return 0.0;
    if ((s0 > 0) != (s1 > 0) && std::abs(d0) > 3.0 * std::abs(s0))
      return 3.0 * s0;
    return d0;
  }
};

std::string canonical_poly_name(const std::vector<double>& d) {
  std::string out = "poly:";
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j) out += ',';
    out += fmt_compact(d[j]);
  }
  return out;
}

}  // namespace

std::function<double(double)> extend_half_derivative(
    std::function<double(double)> h, Side side) {
  if (!h) throw Error(ErrorKind::Parameter, "half derivative is empty");
  // Weak properness needs h >= 0; sample the native half-interval.
  for (double g : chebyshev_interior_grid(1025)) {
    double x = (side == Side::Right) ? 0.5 + 0.5 * g : 0.5 * g;
    double v = h(x);
    if (!std::isfinite(v) || v < 0.0)
      throw Error(ErrorKind::Spec,
                  "half derivative must be nonnegative, h(" + fmt_compact(x) +
                      ") = " + fmt_compact(v));
  }
  return [h = std::move(h), side](double x) {
    require_interior(x, "report x");
    bool native = (side == Side::Right) ? (x >= 0.5) : (x <= 0.5);
    if (native) return h(x);
    return (1.0 - x) / x * h(1.0 - x);
  };
}

Rule rule_from_half_derivative(std::function<double(double)> h, Side side,
                               double f_half, std::string name) {
  auto fp = extend_half_derivative(std::move(h), side);
  auto core = std::make_shared<HalfDerivativeCore>(std::move(fp), f_half);
  return Rule(std::move(core), HalfDerivativeTableSpec{}, std::move(name));
}

Rule build_rule(const RuleSpec& spec) {
  return std::visit(
      overloaded{
          [&](const BuiltinSpec& b) -> Rule {
            switch (b.kind) {
              case BuiltinKind::Log:
                return Rule(std::make_shared<LogCore>(), spec, "log");
              case BuiltinKind::Quad:
                return Rule(std::make_shared<QuadCore>(), spec, "quad");
              case BuiltinKind::Sph:
                return Rule(std::make_shared<SphCore>(), spec, "sph");
              case BuiltinKind::Hs:
                return Rule(std::make_shared<HsCore>(), spec, "hs");
            }
            throw Error(ErrorKind::Spec, "unknown builtin rule");
          },
          [&](const TsallisSpec& t) -> Rule {
            if (!std::isfinite(t.gamma) || !(t.gamma > 1.0))
              throw Error(ErrorKind::Spec,
                          "tsallis exponent must satisfy gamma > 1, got " +
                              fmt_compact(t.gamma));
            return Rule(std::make_shared<TsallisCore>(t.gamma), spec,
                        "tsallis:" + fmt_compact(t.gamma));
          },
          [&](const OptimalSpec& o) -> Rule { return optimal_rule(o.ell); },
          [&](const OptimalLimitSpec&) -> Rule { return optimal_rule_limit(); },
          [&](const PolynomialEvenSeriesSpec& p) -> Rule {
            if (p.d.empty())
              throw Error(ErrorKind::Spec,
                          "polynomial even series needs at least one coefficient");
            for (double v : p.d)
              if (!std::isfinite(v))
                throw Error(ErrorKind::Spec,
                            "polynomial even series has a non-finite coefficient");
            auto core = std::make_shared<EvenSeriesCore>(p.d);
            double vmax = 0.0, vmin = 0.0, witness = 0.5;
            for (double x : chebyshev_interior_grid(4097)) {
              double v = core->reward_second(x);
              vmax = std::max(vmax, v);
              if (v < vmin) {
                vmin = v;
                witness = x;
              }
            }
            if (!(vmax > 0.0))
              throw Error(ErrorKind::Spec,
                          "polynomial even series is identically zero: R'' "
                          "must be positive somewhere");
            if (vmin < -1e-12 * vmax)
              throw Error(ErrorKind::Spec,
                          "polynomial even series must keep R'' >= 0; R''(" +
                              fmt_compact(witness) + ") = " + fmt_compact(vmin));
            return Rule(std::move(core), spec, canonical_poly_name(p.d));
          },
          [&](const HalfDerivativeTableSpec& tb) -> Rule {
            if (tb.x.empty() || tb.x.size() != tb.h.size())
              throw Error(ErrorKind::Spec,
                          "half-derivative table needs matching nonempty x and h columns");
            double hmax = 0.0;
            for (std::size_t i = 0; i < tb.x.size(); ++i) {
              if (!std::isfinite(tb.x[i]) || !std::isfinite(tb.h[i]))
                throw Error(ErrorKind::Spec, "half-derivative table has a non-finite entry");
              if (i && !(tb.x[i] > tb.x[i - 1]))
                throw Error(ErrorKind::Spec,
                            "half-derivative table grid must be strictly increasing");
              if (tb.h[i] < 0.0)
                throw Error(ErrorKind::Spec,
                            "half-derivative table values must be >= 0, h(" +
                                fmt_compact(tb.x[i]) + ") = " + fmt_compact(tb.h[i]));
              hmax = std::max(hmax, tb.h[i]);
            }
            if (!(tb.x.front() >= 0.5) || !(tb.x.back() < 1.0))
              throw Error(ErrorKind::Spec,
                          "half-derivative table grid must lie in [1/2, 1)");
            if (!(hmax > 0.0))
              throw Error(ErrorKind::Spec,
                          "half-derivative table is identically zero");
            auto curve = PchipCurve::build(tb.x, tb.h);
            auto fp = extend_half_derivative(
                [curve = std::move(curve)](double t) { return curve.eval(t); },
                Side::Right);
            auto core = std::make_shared<HalfDerivativeCore>(std::move(fp), 0.0);
            return Rule(std::move(core), spec, "table");
          },
      },
      spec);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
  for (char& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t p = s.find(sep, start);
    if (p == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

double parse_real(const std::string& tok, const char* what) {
  std::string t = trim(tok);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw Error(ErrorKind::Spec,
                std::string("bad number for ") + what + ": '" + tok + "'");
  return v;
}

HalfDerivativeTableSpec load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open table file: " + path);
  HalfDerivativeTableSpec tb;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    for (char& ch : t)
      if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
    std::istringstream row(t);
    std::string c1, c2;
    if (!(row >> c1 >> c2)) {
      throw Error(ErrorKind::Io,
                  path + ":" + std::to_string(lineno) + ": expected two columns");
    }
    char* end1 = nullptr;
    char* end2 = nullptr;
    double x = std::strtod(c1.c_str(), &end1);
    double h = std::strtod(c2.c_str(), &end2);
    if (*end1 || *end2) {
      if (tb.x.empty()) continue;  // header row
      throw Error(ErrorKind::Io,
                  path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    tb.x.push_back(x);
    tb.h.push_back(h);
  }
  if (tb.x.empty())
    throw Error(ErrorKind::Io, path + ": no data rows");
  return tb;
}

}  // namespace

Rule parse_rule(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw Error(ErrorKind::Spec, "empty rule spec");
  auto tok = split(s, ':');
  std::string head = lower(tok[0]);

  auto expect_parts = [&](std::size_t n) {
    if (tok.size() != n)
      throw Error(ErrorKind::Spec, "malformed rule spec: '" + s + "'");
  };

  if (head == "log" || head == "quad" || head == "sph" || head == "hs") {
    expect_parts(1);
    BuiltinKind k = head == "log"    ? BuiltinKind::Log
                    : head == "quad" ? BuiltinKind::Quad
                    : head == "sph"  ? BuiltinKind::Sph
                                     : BuiltinKind::Hs;
    return build_rule(BuiltinSpec{k});
  }
  if (head == "tsallis") {
    expect_parts(2);
    return build_rule(TsallisSpec{parse_real(tok[1], "tsallis exponent")});
  }
  if (head == "opt") {
    if (tok.size() < 2)
      throw Error(ErrorKind::Spec, "opt needs an order: opt:<l> or opt:inf");
    if (lower(trim(tok[1])) == "inf") {
      expect_parts(2);
      return build_rule(OptimalLimitSpec{});
    }
    double ell = parse_real(tok[1], "opt order");
    if (tok.size() == 2) return build_rule(OptimalSpec{ell});
    if (tok.size() == 4 && lower(trim(tok[2])) == "respectful")
      return build_respectful_rule(ell, parse_real(tok[3], "respectful eps"));
    throw Error(ErrorKind::Spec, "malformed opt spec: '" + s + "'");
  }
  if (head == "poly") {
    expect_parts(2);
    PolynomialEvenSeriesSpec p;
    for (const std::string& c : split(tok[1], ','))
      p.d.push_back(parse_real(c, "poly coefficient"));
    return build_rule(p);
  }
  if (head == "table") {
    if (tok.size() < 2)
      throw Error(ErrorKind::Spec, "table needs a file path: table:<path>");
    std::string path = trim(s.substr(s.find(':') + 1));
    return build_rule(load_table(path)).renamed("table:" + path);
  }
  throw Error(ErrorKind::Spec, "unknown rule: '" + s + "'");
}

Rule Rule::renamed(std::string name) const {
  Rule r = *this;
  r.name_ = std::move(name);
  return r;
}

DiagnosticsReport check_proper(const Rule& rule, int grid_size) {
  if (grid_size < 3)
    throw Error(ErrorKind::Parameter, "properness grid needs at least 3 points");
  DiagnosticsReport rep;
  double maxviol = 0.0;
  double fpmin = std::numeric_limits<double>::infinity();
  double r2min = std::numeric_limits<double>::infinity();
  double r2max = -std::numeric_limits<double>::infinity();
  int nonpos = 0, npts = 0;
  // Walk the upper half of the (symmetric) grid and pair each x with 1-x,
  // which is exact for x in [1/2, 1). Forming 1-x from a point near 0 would
  // round to the double grid and pollute the diagnostic for rules whose f'
  // blows up at the endpoints.
  for (double x : chebyshev_interior_grid(grid_size)) {
    if (x < 0.5) continue;
    double xc = 1.0 - x;
    double fp_hi = rule.f_prime(x);
    double fp_lo = (xc == x) ? fp_hi : rule.f_prime(xc);
    maxviol = std::max(maxviol, std::abs(x * fp_hi - xc * fp_lo));
    for (double side : {x, xc}) {
      double fp = (side == x) ? fp_hi : fp_lo;
      fpmin = std::min(fpmin, fp);
      if (!(fp > 0.0)) ++nonpos;
      double r2 = rule.reward_second(side);
      r2min = std::min(r2min, r2);
      r2max = std::max(r2max, r2);
      ++npts;
      if (xc == x) break;
    }
  }
  rep.proper_identity_max_violation = maxviol;
  rep.fprime_min = fpmin;
  rep.fprime_nonpositive_fraction = double(nonpos) / double(npts);
  rep.r2_min = r2min;
  rep.r2_max = r2max;
  rep.proper = maxviol <= 1e-8 && rep.fprime_nonpositive_fraction <= 1e-3;
  rep.normalized_residuals.f_half = std::abs(rule.f(0.5));
  return rep;
}

RespectfulCheck check_respectful(const Rule& rule, double c, double t) {
  if (!(c > 0.0 && c < 1.0))
    throw Error(ErrorKind::Parameter, "cost c must lie in (0,1)");
  if (!(t > 0.25 && t <= 0.3))
    throw Error(ErrorKind::Parameter, "exponent t must lie in (1/4, 3/10]");
  RespectfulCheck res;
  res.c = c;
  res.t = t;

  // Condition 1: R'' bounded away from zero. The grid reaches 1e-12 into the
  // corners, where the thin-tailed rules actually fail.
  std::vector<double> g1 = chebyshev_interior_grid(1025);
  for (int e = -12; e <= -1; ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      double x = m * std::pow(10.0, e);
      if (x < 0.5) {
        g1.push_back(x);
        g1.push_back(1.0 - x);
      }
    }
  }
  std::sort(g1.begin(), g1.end());
  constexpr double kFloor = 1e-3;
  double r2min = std::numeric_limits<double>::infinity(), witness = 0.5;
  for (double x : g1) {
    double r2 = rule.reward_second(x);
    if (r2 < r2min) {
      r2min = r2;
      witness = x;
    }
  }
  if (!(r2min >= kFloor)) {
    res.pass = false;
    res.failed_condition = 1;
    res.witness_x = witness;
    res.detail = "R''(" + fmt_compact(witness) + ") = " + fmt_compact(r2min) +
                 " below convexity floor " + fmt_compact(kFloor);
    return res;
  }

  // Condition 3: |R'''| <= R''/(c^0.16 sqrt(x(1-x))) on [c^t, 1-c^t].
  double lo = std::pow(c, t);
  if (lo < 0.5) {
    double damp = std::pow(c, 0.16);
    for (double u : chebyshev_interior_grid(2049)) {
      double x = lo + (1.0 - 2.0 * lo) * u;
      double r2 = rule.reward_second(x);
      double r3 = rule.reward_third(x);
      double bound = r2 / (damp * std::sqrt(x * (1.0 - x)));
      if (!(std::abs(r3) <= bound)) {
        res.pass = false;
        res.failed_condition = 3;
        res.witness_x = x;
        res.detail = "|R'''(" + fmt_compact(x) + ")| = " + fmt_compact(std::abs(r3)) +
                     " exceeds R''/(c^0.16 sqrt(x(1-x))) = " + fmt_compact(bound);
        return res;
      }
    }
  }
  res.pass = true;
  return res;
}

}  // namespace precis
