#include "precis/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>
#include <utility>

namespace precis {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Spec: return "spec";
    case ErrorKind::NonConvergence: return "non_convergence";
    case ErrorKind::NonNormalizable: return "non_normalizable";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Approximation: return "approximation";
    case ErrorKind::State: return "state";
    case ErrorKind::Horizon: return "horizon";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

namespace {

// Gauss-Kronrod 7/15 nodes and weights (positive half; index 7 is the
// center). Odd-indexed nodes carry the embedded 7-point Gauss rule.
constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
constexpr double kWk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double lo, hi;
  double value;
  double err;
};

Panel eval_panel(const std::function<double(double)>& fn, double lo,
                 double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  // Keep samples strictly inside the open panel even when rounding would
  // collide with an endpoint (possible near x = 1 where absolute resolution
  // of 1-x is ~1e-16).
  const double in_lo = std::nextafter(lo, hi);
  const double in_hi = std::nextafter(hi, lo);
  auto sample = [&](double x) {
    return fn(std::min(std::max(x, in_lo), in_hi));
  };

  const double fc = sample(c);
  double fp[7], fm[7];
  double resk = kWk[7] * fc;
  double resg = kWg[3] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kNodes[j];
    fp[j] = sample(c + dx);
    fm[j] = sample(c - dx);
    const double fsum = fp[j] + fm[j];
    resk += kWk[j] * fsum;
    if (j % 2 == 1) resg += kWg[j / 2] * fsum;
    resabs += kWk[j] * (std::abs(fp[j]) + std::abs(fm[j]));
  }
  const double reskh = 0.5 * resk;
  double resasc = kWk[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j)
    resasc += kWk[j] * (std::abs(fp[j] - reskh) + std::abs(fm[j] - reskh));

  Panel p;
  p.lo = lo;
  p.hi = hi;
  p.value = resk * h;
  resabs *= std::abs(h);
  resasc *= std::abs(h);
  double err = std::abs((resk - resg) * h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min();
  if (resabs > tiny / (50.0 * eps)) err = std::max(err, 50.0 * eps * resabs);
  p.err = err;
  return p;
}

}  // namespace

QuadResult integrate_open(const std::function<double(double)>& fn, double lo,
                          double hi, double rel_tol, int max_subdivisions) {
  if (!(lo < hi))
    throw Error(ErrorKind::Parameter, "integrate_open: requires lo < hi");
  if (!(rel_tol > 0))
    throw Error(ErrorKind::Parameter, "integrate_open: rel_tol must be > 0");

  std::vector<Panel> arena;
  std::vector<char> alive;
  // (err, -lo, index): worst panel first, leftmost on ties.
  std::priority_queue<std::tuple<double, double, std::size_t>> queue;

  auto totals = [&] {
    // Deterministic left-to-right sum over live panels.
    std::vector<std::size_t> idx;
    idx.reserve(arena.size());
    for (std::size_t i = 0; i < arena.size(); ++i)
      if (alive[i]) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return arena[a].lo < arena[b].lo;
    });
    double v = 0, e = 0;
    for (std::size_t i : idx) {
      v += arena[i].value;
      e += arena[i].err;
    }
    return std::pair<double, double>(v, e);
  };

  auto push_panel = [&](double a, double b) {
    Panel p = eval_panel(fn, a, b);
    if (!std::isfinite(p.value)) {
      auto [v, e] = totals();
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "integrate_open: integrand overflow inside (%.17g, %.17g); "
                    "estimate so far %.17g",
                    a, b, v);
      throw NonConvergenceError(buf, v, std::max(e, p.err));
    }
    arena.push_back(p);
    alive.push_back(1);
    queue.emplace(p.err, -a, arena.size() - 1);
  };

  const double mid = 0.5 * (lo + hi);
  push_panel(lo, mid);
  push_panel(mid, hi);
  int live_count = 2;

  double run_value = arena[0].value + arena[1].value;
  double run_err = arena[0].err + arena[1].err;
  long refinements_since_resync = 0;

  while (run_err > std::max(rel_tol * std::abs(run_value), 1e-14)) {
    if (live_count + 1 > max_subdivisions) {
      auto [v, e] = totals();
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "integrate_open: no convergence after %d panels "
                    "(estimate %.17g, error bound %.3g)",
                    live_count, v, e);
      throw NonConvergenceError(buf, v, e);
    }
    if (queue.empty()) {
      // Every remaining panel is at the resolution floor; bisection cannot
      // sharpen the estimate further.
      auto [v, e] = totals();
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "integrate_open: resolution floor reached "
                    "(estimate %.17g, error bound %.3g)",
                    v, e);
      throw NonConvergenceError(buf, v, e);
    }
    auto [err, neglo, i] = queue.top();
    queue.pop();
    (void)err;
    (void)neglo;
    Panel parent = arena[i];
    const double m = 0.5 * (parent.lo + parent.hi);
    if (m <= parent.lo || m >= parent.hi) {
      // No representable interior point: freeze this panel (it stays in the
      // totals with its error) and try the next-worst one.
      continue;
    }
    alive[i] = 0;
    run_value -= parent.value;
    run_err -= parent.err;
    push_panel(parent.lo, m);
    push_panel(m, parent.hi);
    live_count += 1;
    run_value += arena[arena.size() - 2].value + arena.back().value;
    run_err += arena[arena.size() - 2].err + arena.back().err;
    // The running sums drift relative to an exact re-sum; refresh rarely.
    if (++refinements_since_resync >= 4096) {
      auto [v, e] = totals();
      run_value = v;
      run_err = e;
      refinements_since_resync = 0;
    }
  }

  auto [v, e] = totals();
  QuadResult r;
  r.value = v;
  r.error_estimate = e;
  r.subdivisions = live_count;
  return r;
}

std::vector<double> chebyshev_interior_grid(int m) {
  if (m < 1)
    throw Error(ErrorKind::Parameter, "chebyshev_interior_grid: m must be >= 1");
  std::vector<double> g(m);
  for (int j = 0; j < m; ++j)
    g[j] = 0.5 * (1.0 - std::cos(std::numbers::pi * (j + 0.5) / m));
  if (m % 2 == 1) g[(m - 1) / 2] = 0.5;
  return g;
}

GradedAntiderivative::GradedAntiderivative(std::function<double(double)> fn,
                                           double anchor, int nodes)
    : fn_(std::move(fn)) {
  if (!(anchor > 0 && anchor < 1))
    throw Error(ErrorKind::Parameter, "GradedAntiderivative: anchor must be in (0,1)");
  if (nodes < 3)
    throw Error(ErrorKind::Parameter, "GradedAntiderivative: needs >= 3 nodes");
  x_ = chebyshev_interior_grid(nodes);
  // Make sure the anchor itself is a node so F(anchor) = 0 holds exactly.
  auto it = std::lower_bound(x_.begin(), x_.end(), anchor);
  if (it == x_.end() || *it != anchor) x_.insert(it, anchor);
  cum_.assign(x_.size(), 0.0);
  const std::size_t a =
      std::lower_bound(x_.begin(), x_.end(), anchor) - x_.begin();
  for (std::size_t j = a; j + 1 < x_.size(); ++j)
    cum_[j + 1] = cum_[j] + integrate_open(fn_, x_[j], x_[j + 1], 1e-12).value;
  for (std::size_t j = a; j > 0; --j)
    cum_[j - 1] = cum_[j] - integrate_open(fn_, x_[j - 1], x_[j], 1e-12).value;
}

double GradedAntiderivative::operator()(double x) const {
  if (!(x > 0 && x < 1))
    throw Error(ErrorKind::Domain, "GradedAntiderivative: x must be in (0,1)");
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t j = (it == x_.begin()) ? 0 : (it - x_.begin() - 1);
  // Use the nearer neighbor to keep the completion integral short.
  if (j + 1 < x_.size() && x_[j + 1] - x < x - x_[j]) ++j;
  if (x == x_[j]) return cum_[j];
  if (x > x_[j]) return cum_[j] + integrate_open(fn_, x_[j], x, 1e-12).value;
  return cum_[j] - integrate_open(fn_, x, x_[j], 1e-12).value;
}

}  // namespace precis
