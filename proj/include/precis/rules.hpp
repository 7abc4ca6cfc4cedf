#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "precis/errors.hpp"

namespace precis {

// A scoring rule f on (0,1): report x earns f(x) on heads, f(1-x) on tails.
// R(p) = p f(p) + (1-p) f(1-p) is the expected reward of a truthful report.

enum class BuiltinKind { Log, Quad, Sph, Hs };

struct BuiltinSpec {
  BuiltinKind kind;
};
struct TsallisSpec {
  double gamma = 2.0;  // > 1
};
struct OptimalSpec {
  double ell = 1.0;  // >= 1
};
struct OptimalLimitSpec {};
// R''(x) = sum_j d[j] (x - 1/2)^(2j): the even series about 1/2 that every
// symmetric polynomial rule has. Must be nonnegative and not identically zero.
struct PolynomialEvenSeriesSpec {
  std::vector<double> d;
};
// f' sampled on a strictly increasing grid in [1/2, 1); values >= 0, not all
// zero. Interpolated with a shape-preserving monotone cubic, extended as a
// constant beyond the grid, mirrored to (0, 1/2) by weak properness.
struct HalfDerivativeTableSpec {
  std::vector<double> x, h;
};

using RuleSpec =
    std::variant<BuiltinSpec, TsallisSpec, OptimalSpec, OptimalLimitSpec,
                 PolynomialEvenSeriesSpec, HalfDerivativeTableSpec>;

struct Evaluation {
  double f, f_prime, R, R_prime, R_second;
};

// Raw (scale 1, shift 0) machinery behind a Rule; immutable once built.
class RuleCore {
 public:
  virtual ~RuleCore() = default;
  virtual double f(double x) const = 0;
  virtual double f_prime(double x) const = 0;
  virtual double reward(double p) const;         // p f(p) + (1-p) f(1-p)
  virtual double reward_second(double x) const;  // f'(x)/(1-x)
  virtual bool has_reward_third() const { return false; }
  virtual double reward_third(double x) const;
};

class Rule {
 public:
  Rule(std::shared_ptr<const RuleCore> core, RuleSpec spec, std::string name,
       double a = 1.0, double b = 0.0, bool normalized = false);

  double f(double x) const;
  double f_prime(double x) const;
  double reward(double p) const;
  double reward_prime(double x) const;  // f(x) - f(1-x)
  double reward_second(double x) const;
  bool has_reward_third() const;
  // Closed form when the core has one, else central differences of R'' with
  // step min(1e-4, dist(x, {0,1})/8).
  double reward_third(double x) const;
  Evaluation evaluate(double x) const;

  const std::string& name() const { return name_; }
  const RuleSpec& spec() const { return spec_; }
  double scale() const { return a_; }
  double shift() const { return b_; }
  bool normalized() const { return normalized_; }

  // The affine rule a2*(this rule) + b2.
  Rule rescaled(double a2, double b2, bool normalized) const;
  // Same rule under a different display name (e.g. table:<path>).
  Rule renamed(std::string name) const;

 private:
  std::shared_ptr<const RuleCore> core_;
  RuleSpec spec_;
  std::string name_;
  double a_, b_;
  bool normalized_;
};

// Builds the raw rule for a spec (validating its invariants). Optimal rules
// come out normalized by construction; everything else has a = 1, b = 0.
Rule build_rule(const RuleSpec& spec);

// Mini-grammar shared by the CLI and config files:
//   log | quad | sph | hs | tsallis:<g> | opt:<l> | opt:inf
//   | opt:<l>:respectful:<eps> | poly:<d0,d2,...> | table:<path>
// where <path> is a two-column CSV of (x, h(x)) on [1/2, 1).
Rule parse_rule(const std::string& text);

enum class Side { Left, Right };

// Extends h, given on one half-interval ((0,1/2] for Left, [1/2,1) for
// Right), to a full derivative f' on (0,1) via the weak-properness mirror
// f'(p) = ((1-p)/p) h(1-p). h must be nonnegative (checked on a grid).
std::function<double(double)> extend_half_derivative(
    std::function<double(double)> h, Side side);

// Full rule from a half-derivative: f' as above, f anchored at f(1/2) =
// f_half and reconstructed by integration.
Rule rule_from_half_derivative(std::function<double(double)> h, Side side,
                               double f_half = 0.0,
                               std::string name = "half-derivative");

struct RespectfulCheck {
  double c = 0, t = 0;
  bool pass = false;
  int failed_condition = 0;  // 0 = none, 1 = convexity floor, 3 = R'''/R'' bound
  double witness_x = 0;      // violating x: argmin R'' for (1), first in x for (3)
  std::string detail;
};

struct DiagnosticsReport {
  double proper_identity_max_violation = 0;  // max |x f'(x) - (1-x) f'(1-x)|
  double fprime_min = 0;
  double fprime_nonpositive_fraction = 0;
  double r2_min = 0, r2_max = 0;
  bool proper = false;
  std::vector<RespectfulCheck> respectful_at;
  struct {
    double f_half = std::numeric_limits<double>::quiet_NaN();
    double mean_reward = std::numeric_limits<double>::quiet_NaN();
  } normalized_residuals;
};

// Grid diagnostic for the properness identity x f'(x) = (1-x) f'(1-x) and
// f' > 0. Tolerance 1e-8 on a Chebyshev-interior grid; f' may be
// nonpositive on at most 0.1% of the grid.
DiagnosticsReport check_proper(const Rule& rule, int grid_size = 4097);

// Numeric surrogate for the regularity conditions under which the index
// theorem applies: (1) R'' bounded away from zero (floor 1e-3, grid refined
// to 1e-12 at the boundary), (3) |R'''(x)| <= R''(x)/(c^0.16 sqrt(x(1-x)))
// on [c^t, 1-c^t]. The strong-convexity constant itself (condition 2) has no
// finite check; condition numbering matches the definition.
RespectfulCheck check_respectful(const Rule& rule, double c, double t = 0.29);

}  // namespace precis
