#include "precis/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "precis/calculus.hpp"
#include "precis/format.hpp"
#include "precis/index.hpp"
#include "precis/quadrature.hpp"

namespace precis {

namespace {

constexpr long long kRunawayFlips = 1'000'000'000LL;
constexpr long long kMaxPolicyStates = 25'000'000LL;

std::string state_str(long long n, long long k) {
  return "(" + std::to_string(n) + ", " + std::to_string(k) + ")";
}

void require_state(long long n, long long k) {
  if (n < 0 || k < 0 || k > n)
    throw Error(ErrorKind::State,
                "expert state needs 0 <= k <= n, got " + state_str(n, k));
}

void require_cost(double cost) {
  if (!(cost > 0.0) || !std::isfinite(cost))
    throw Error(ErrorKind::Parameter,
                "flip cost must be a positive finite real, got " +
                    fmt_compact(cost));
}

void require_bias(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw Error(ErrorKind::Domain,
                "true bias must lie in (0,1), got " + fmt_compact(p));
}

std::size_t tri_index(long long n, long long k) {
  return static_cast<std::size_t>(n * (n + 1) / 2 + k);
}

// R at every posterior reachable in row n, computed once per row.
std::vector<double> reward_row(const Rule& rule, long long n) {
  std::vector<double> r(static_cast<std::size_t>(n) + 1);
  for (long long k = 0; k <= n; ++k)
    r[static_cast<std::size_t>(k)] = rule.reward((k + 1.0) / (n + 2.0));
  return r;
}

// Smallest horizon of the form (formula, then doublings) whose final row has
// every one-flip gain below the cost; a trajectory that reaches it stops.
long long certified_horizon(const Rule& rule, double cost) {
  double d = 0.0;
  for (double x : chebyshev_interior_grid(4097))
    d = std::max(d, x * (1.0 - x) * rule.reward_second(x));
  long long n =
      static_cast<long long>(std::ceil(2.0 * std::sqrt(d / (2.0 * cost)))) + 16;
  for (int escalation = 0;; ++escalation) {
    const long long states = (n + 1) * (n + 2) / 2;
    if (states > kMaxPolicyStates)
      throw Error(ErrorKind::Horizon,
                  "cost " + fmt_compact(cost) + " needs a stopping table of " +
                      std::to_string(states) + " states (horizon " +
                      std::to_string(n) + "); the ceiling is " +
                      std::to_string(kMaxPolicyStates));
    long long bad_k = -1;
    double bad_gain = 0.0;
    for (long long k = 0; k <= n; ++k) {
      const double g = marginal_gain(rule, n, k);
      if (g >= cost) {
        bad_k = k;
        bad_gain = g;
        break;
      }
    }
    if (bad_k < 0) return n;
    if (escalation == 8)
      throw Error(ErrorKind::Horizon,
                  "stopping horizon not certified: state " +
                      state_str(n, bad_k) + " still has gain " +
                      fmt_compact(bad_gain) + " at cost " + fmt_compact(cost));
    n *= 2;
  }
}

StoppingPolicy blank_policy(const Rule& rule, double cost, long long n_max) {
  StoppingPolicy policy;
  policy.rule = rule.name();
  policy.cost = cost;
  policy.n_max = static_cast<int>(n_max);
  const std::size_t states = tri_index(n_max, n_max) + 1;
  policy.stop.assign(states, 0);
  policy.value.assign(states, 0.0);
  return policy;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

const char* mode_name(Mode mode) {
  return mode == Mode::Local ? "local" : "global";
}

}  // namespace

Posterior posterior_mean(long long n, long long k) {
  require_state(n, k);
  const long long g = std::gcd(k + 1, n + 2);
  return Posterior{(k + 1) / g, (n + 2) / g};
}

double marginal_gain(const Rule& rule, long long n, long long k) {
  require_state(n, k);
  const double q = (k + 1.0) / (n + 2.0);
  const double reward_heads = rule.reward((k + 2.0) / (n + 3.0));
  const double reward_tails = rule.reward((k + 1.0) / (n + 3.0));
  return q * reward_heads + (1.0 - q) * reward_tails - rule.reward(q);
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t trial) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  state_ = (z ^ (z >> 31)) + trial;
}

double RandomStream::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  // 52 high bits, centered: strictly inside (0,1)
  return (static_cast<double>(z >> 12) + 0.5) * 0x1.0p-52;
}

bool StoppingPolicy::stop_at(long long n, long long k) const {
  require_state(n, k);
  if (n > n_max)
    throw Error(ErrorKind::State, "state " + state_str(n, k) +
                                      " lies beyond the policy horizon " +
                                      std::to_string(n_max));
  return stop[tri_index(n, k)] != 0;
}

double StoppingPolicy::value_at(long long n, long long k) const {
  require_state(n, k);
  if (n > n_max)
    throw Error(ErrorKind::State, "state " + state_str(n, k) +
                                      " lies beyond the policy horizon " +
                                      std::to_string(n_max));
  return value[tri_index(n, k)];
}

StoppingPolicy build_local_policy(const Rule& rule, double cost) {
  require_cost(cost);
  const long long n_max = certified_horizon(rule, cost);
  StoppingPolicy policy = blank_policy(rule, cost, n_max);
  std::vector<double> next = reward_row(rule, 0);
  for (long long n = 0; n <= n_max; ++n) {
    const std::vector<double> cur = std::move(next);
    next = reward_row(rule, n + 1);
    for (long long k = 0; k <= n; ++k) {
      const double q = (k + 1.0) / (n + 2.0);
      const double gain = q * next[static_cast<std::size_t>(k) + 1] +
                          (1.0 - q) * next[static_cast<std::size_t>(k)] -
                          cur[static_cast<std::size_t>(k)];
      const std::size_t idx = tri_index(n, k);
      policy.value[idx] = cur[static_cast<std::size_t>(k)];
      policy.stop[idx] = (n == n_max) || gain < cost;
    }
  }
  return policy;
}

StoppingPolicy build_global_policy(const Rule& rule, double cost) {
  require_cost(cost);
  const long long n_max = certified_horizon(rule, cost);
  StoppingPolicy policy = blank_policy(rule, cost, n_max);
  std::vector<double> rewards = reward_row(rule, n_max);
  for (long long k = 0; k <= n_max; ++k) {
    const std::size_t idx = tri_index(n_max, k);
    policy.stop[idx] = 1;
    policy.value[idx] = rewards[static_cast<std::size_t>(k)];
  }
  for (long long n = n_max - 1; n >= 0; --n) {
    rewards = reward_row(rule, n);
    for (long long k = 0; k <= n; ++k) {
      const double q = (k + 1.0) / (n + 2.0);
      const double continuation = -cost +
                                  q * policy.value[tri_index(n + 1, k + 1)] +
                                  (1.0 - q) * policy.value[tri_index(n + 1, k)];
      const double stay = rewards[static_cast<std::size_t>(k)];
      const bool stop = !(continuation > stay);
      const std::size_t idx = tri_index(n, k);
      policy.stop[idx] = stop;
      policy.value[idx] = stop ? stay : continuation;
    }
  }
  return policy;
}

Trajectory run_local_trajectory(const Rule& rule, double cost, double p,
                                RandomStream& stream) {
  require_cost(cost);
  require_bias(p);
  long long n = 0, k = 0;
  while (marginal_gain(rule, n, k) >= cost) {
    if (n >= kRunawayFlips)
      throw Error(ErrorKind::Horizon,
                  "local stopping did not trigger within 1e9 flips; is the "
                  "cost effectively zero?");
    if (stream.next() <= p) ++k;
    ++n;
  }
  const double q = (k + 1.0) / (n + 2.0);
  return Trajectory{p, n, q, std::fabs(p - q), cost * n, rule.reward(q)};
}

Trajectory run_global_trajectory(const StoppingPolicy& policy, double p,
                                 RandomStream& stream) {
  require_bias(p);
  long long n = 0, k = 0;
  while (!policy.stop_at(n, k)) {
    if (stream.next() <= p) ++k;
    ++n;
  }
  const double q = (k + 1.0) / (n + 2.0);
  // the policy stopped here, so its value is exactly R(q)
  return Trajectory{p,
                    n,
                    q,
                    std::fabs(p - q),
                    policy.cost * n,
                    policy.value_at(n, k)};
}

SimReport monte_carlo(const SimConfig& config) {
  require_cost(config.cost);
  if (config.trials < 1)
    throw Error(ErrorKind::Parameter, "trials must be at least 1, got " +
                                          std::to_string(config.trials));
  if (config.ells.empty())
    throw Error(ErrorKind::Parameter, "at least one error exponent is needed");
  for (double ell : config.ells)
    if (!(ell >= 1.0) || !std::isfinite(ell))
      throw Error(ErrorKind::Parameter,
                  "error exponent must be a finite real >= 1, got " +
                      fmt_compact(ell));
  if (config.fixed_p && !(*config.fixed_p > 0.0 && *config.fixed_p < 1.0))
    throw Error(ErrorKind::Parameter,
                "fixed true bias must lie in (0,1), got " +
                    fmt_compact(*config.fixed_p));

  Rule rule = parse_rule(config.rule_spec);
  bool auto_normalized = false;
  if (!rule.normalized()) {
    rule = normalize_rule(rule).first;
    auto_normalized = true;
  }

  std::optional<StoppingPolicy> local, global;
  if (config.mode == Mode::Local || config.coupled)
    local.emplace(build_local_policy(rule, config.cost));
  if (config.mode == Mode::Global || config.coupled)
    global.emplace(build_global_policy(rule, config.cost));

  const std::size_t n_ells = config.ells.size();
  std::vector<double> sum(n_ells, 0.0), sum_sq(n_ells, 0.0);
  double flips_sum = 0.0;
  long long flips_min = std::numeric_limits<long long>::max();
  long long flips_max = 0;
  CoupledStats coupled;
  double ratio_sum = 0.0;

  for (long long trial = 0; trial < config.trials; ++trial) {
    Trajectory traj;
    if (config.coupled) {
      RandomStream local_stream(config.seed, static_cast<std::uint64_t>(trial));
      const double p_local =
          config.fixed_p ? *config.fixed_p : local_stream.next();
      const Trajectory t_local =
          run_global_trajectory(*local, p_local, local_stream);
      RandomStream global_stream(config.seed,
                                 static_cast<std::uint64_t>(trial));
      const double p_global =
          config.fixed_p ? *config.fixed_p : global_stream.next();
      const Trajectory t_global =
          run_global_trajectory(*global, p_global, global_stream);
      if (t_global.flips < t_local.flips) ++coupled.violations;
      if (t_local.flips > 0) {
        ++coupled.trials_compared;
        ratio_sum += static_cast<double>(t_global.flips) /
                     static_cast<double>(t_local.flips);
      }
      traj = config.mode == Mode::Local ? t_local : t_global;
    } else {
      RandomStream stream(config.seed, static_cast<std::uint64_t>(trial));
      const double p = config.fixed_p ? *config.fixed_p : stream.next();
      traj = run_global_trajectory(
          config.mode == Mode::Local ? *local : *global, p, stream);
    }
    for (std::size_t i = 0; i < n_ells; ++i) {
      const double w = std::pow(traj.error, config.ells[i]);
      sum[i] += w;
      sum_sq[i] += w * w;
    }
    flips_sum += static_cast<double>(traj.flips);
    flips_min = std::min(flips_min, traj.flips);
    flips_max = std::max(flips_max, traj.flips);
  }

  SimReport report;
  report.rule = rule.name();
  report.cost = config.cost;
  report.trials = config.trials;
  report.seed = config.seed;
  report.mode = config.mode;
  report.auto_normalized = auto_normalized;
  report.avg_flips = flips_sum / static_cast<double>(config.trials);
  report.min_flips = flips_min;
  report.max_flips = flips_max;
  const double n_trials = static_cast<double>(config.trials);
  for (std::size_t i = 0; i < n_ells; ++i) {
    EllStats stats;
    stats.ell = config.ells[i];
    stats.avg_error = sum[i] / n_trials;
    if (config.trials > 1) {
      const double centered =
          std::max(0.0, sum_sq[i] - n_trials * stats.avg_error * stats.avg_error);
      stats.std_error = std::sqrt(centered / (n_trials - 1.0) / n_trials);
    }
    stats.predicted = predicted_error(rule, config.ells[i], config.cost);
    stats.ratio = stats.avg_error / stats.predicted;
    report.per_ell.push_back(stats);
  }
  if (config.coupled) {
    coupled.mean_flip_ratio =
        coupled.trials_compared > 0
            ? ratio_sum / static_cast<double>(coupled.trials_compared)
            : 1.0;
    report.coupled = coupled;
  }
  return report;
}

std::string to_csv(const SimReport& report) {
  std::string out;
  for (const EllStats& e : report.per_ell) {
    out += fmt_full(report.cost) + "," + csv_field(report.rule) + "," +
           fmt_full(e.avg_error) + "," + fmt_full(e.predicted) + "," +
           fmt_full(e.ratio) + "," + fmt_full(report.avg_flips) + "," +
           std::to_string(report.max_flips) + "\n";
  }
  return out;
}

std::string to_json(const SimReport& report) {
  nlohmann::ordered_json j;
  j["rule"] = report.rule;
  j["cost"] = report.cost;
  j["trials"] = report.trials;
  j["seed"] = report.seed;
  j["mode"] = mode_name(report.mode);
  j["auto_normalized"] = report.auto_normalized;
  j["flips"] = {{"avg", report.avg_flips},
                {"min", report.min_flips},
                {"max", report.max_flips}};
  j["errors"] = nlohmann::ordered_json::array();
  for (const EllStats& e : report.per_ell)
    j["errors"].push_back({{"ell", e.ell},
                           {"avg_error", e.avg_error},
                           {"std_error", e.std_error},
                           {"predicted_avg_error", e.predicted},
                           {"ratio", e.ratio}});
  if (report.coupled)
    j["coupled"] = {{"trials_compared", report.coupled->trials_compared},
                    {"violations", report.coupled->violations},
                    {"mean_flip_ratio", report.coupled->mean_flip_ratio}};
  return j.dump(2) + "\n";
}

}  // namespace precis
