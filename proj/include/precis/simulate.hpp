#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "precis/rules.hpp"

namespace precis {

// Posterior mean of the coin bias after n flips with k heads under the
// uniform prior: exactly (k+1)/(n+2), kept as a reduced fraction so rational
// state arithmetic stays rounding-free.
struct Posterior {
  long long num = 1;
  long long den = 2;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Posterior posterior_mean(long long n, long long k);

// Expected reward increase from exactly one more flip at state (n, k):
//   Delta = q R((k+2)/(n+3)) + (1-q) R((k+1)/(n+3)) - R(q),  q = (k+1)/(n+2).
// Strictly positive for strictly proper rules.
double marginal_gain(const Rule& rule, long long n, long long k);

// Deterministic counter-based uniform stream: the pair (seed, trial) fixes
// the whole sequence, so trial order and thread count can never change a
// simulation's output.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t trial);
  double next();  // strictly inside (0,1)

 private:
  std::uint64_t state_;
};

struct Trajectory {
  double p_true = 0;
  long long flips = 0;
  double q_final = 0.5;
  double error = 0;            // |p_true - q_final|
  double cost_paid = 0;        // cost * flips
  double reward_expected = 0;  // R(q_final)
};

// Stop/value tables over the state triangle 0 <= k <= n <= n_max, stored
// row-major with idx(n, k) = n(n+1)/2 + k. value(n, k) is the expected payoff
// of the strategy from that state, so it equals R(q) exactly wherever the
// policy stops and never falls below it.
struct StoppingPolicy {
  std::string rule;
  double cost = 0;
  int n_max = 0;
  std::vector<std::uint8_t> stop;
  std::vector<double> value;

  bool stop_at(long long n, long long k) const;
  double value_at(long long n, long long k) const;
};

// One-step lookahead: stop wherever the single-flip gain falls below the
// cost. A gain exactly equal to the cost flips.
StoppingPolicy build_local_policy(const Rule& rule, double cost);

// Payoff-maximizing strategy by backward induction over the same triangle.
// Stops unless continuing strictly increases the expected payoff. The
// horizon starts at ceil(2 sqrt(D/2c)) + 16 with D = sup x(1-x)R''(x) taken
// over a dense grid, then is certified by checking that every state in the
// final row has gain below the cost, doubling on failure (at most 8 times).
StoppingPolicy build_global_policy(const Rule& rule, double cost);

// Reference walker: recomputes the one-flip gain at every state and flips
// while it is at least the cost. Heads iff the next draw r satisfies r <= p.
Trajectory run_local_trajectory(const Rule& rule, double cost, double p,
                                RandomStream& stream);

// Table walker with the same stream semantics; works for either policy.
Trajectory run_global_trajectory(const StoppingPolicy& policy, double p,
                                 RandomStream& stream);

enum class Mode { Local, Global };

struct SimConfig {
  std::string rule_spec;
  double cost = 0;
  long long trials = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Local;
  std::vector<double> ells = {1.0};
  std::optional<double> fixed_p;  // p_true drawn uniformly when absent
  bool coupled = false;           // also run the other mode on common draws
};

struct EllStats {
  double ell = 1;
  double avg_error = 0;  // mean |p_true - q_final|^ell
  double std_error = 0;  // standard error of that mean
  double predicted = 0;  // predicted_error(rule, ell, cost)
  double ratio = 0;      // avg_error / predicted
};

struct CoupledStats {
  long long trials_compared = 0;  // trials with at least one local flip
  long long violations = 0;       // trials where global flipped fewer times
  double mean_flip_ratio = 0;     // mean of n_global / n_local when compared
};

struct SimReport {
  std::string rule;
  double cost = 0;
  long long trials = 0;
  std::uint64_t seed = 0;
  Mode mode = Mode::Local;
  bool auto_normalized = false;  // input spec was rescaled before simulating
  std::vector<EllStats> per_ell;
  double avg_flips = 0;
  long long min_flips = 0;
  long long max_flips = 0;
  std::optional<CoupledStats> coupled;
};

// Runs config.trials independent trajectories with per-trial streams and a
// fixed accumulation order; identical configs give bitwise-identical reports.
SimReport monte_carlo(const SimConfig& config);

// One data row per ell:
//   cost,rule,avg_error,predicted_avg_error,ratio,avg_flips,max_flips
std::string to_csv(const SimReport& report);
std::string to_json(const SimReport& report);

}  // namespace precis
