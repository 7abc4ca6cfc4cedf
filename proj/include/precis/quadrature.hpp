#pragma once

#include <functional>
#include <vector>

#include "precis/errors.hpp"

namespace precis {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 1;
};

// Adaptive Gauss-Kronrod 7/15 on the open interval (lo, hi). Every node is
// strictly interior, so integrable endpoint singularities (log, x^-1/2, ...)
// need no special casing. The initial interval is split at its midpoint, which
// for (0,1) puts the symmetry point 1/2 on a panel boundary. Refinement is
// worst-panel-first with a deterministic tie-break and the final sum is taken
// in left-to-right panel order, so results do not depend on scheduling.
//
// Converged when the summed error estimate is below
// max(rel_tol * |value|, 1e-14). Hitting max_subdivisions throws
// NonConvergenceError carrying the best estimate and its error bound.
QuadResult integrate_open(const std::function<double(double)>& fn, double lo,
                          double hi, double rel_tol = 1e-9,
                          int max_subdivisions = 1000000);

// Strictly interior symmetric grid on (0,1): x_j = (1 - cos(pi (j+1/2)/m))/2,
// j = 0..m-1. Dense near the endpoints, never touching them. For odd m the
// middle point is forced to exactly 0.5.
std::vector<double> chebyshev_interior_grid(int m);

// Cumulative antiderivative F with F(anchor) = 0, cached at boundary-graded
// nodes over (0,1) (Chebyshev-interior spacing, which clusters like
// sqrt(x(1-x)) near the ends) and completed by a short adaptive integral from
// the nearest cached node. fn may have integrable or mildly divergent
// endpoint behavior; evaluation stays on (0,1).
class GradedAntiderivative {
 public:
  explicit GradedAntiderivative(std::function<double(double)> fn,
                                double anchor = 0.5, int nodes = 2001);
  double operator()(double x) const;

 private:
  std::function<double(double)> fn_;
  std::vector<double> x_;
  std::vector<double> cum_;
};

}  // namespace precis
