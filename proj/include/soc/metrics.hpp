#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "soc/env.hpp"
#include "soc/policy.hpp"
#include "soc/rng.hpp"

namespace soc {

// Test-time statistics of a policy over a batch of rollouts.
struct EvalReport {
  double l2_error = 0.0;     // empirical L2 distance to the reference policy
  double mean_return = 0.0;
  double mean_length = 0.0;  // mean number of steps
  std::int64_t truncated_count = 0;
  std::int64_t k = 0;
};

// sum_{t=0}^{T} |mu - mu_ref|^2(s_t) dt along one trajectory, s_T included.
double l2_along(const Trajectory& trajectory, const Policy& policy, const Policy& reference, double dt);

// Rolls out `k_test` trajectories under `policy` (stream k = streams(k)) and
// averages l2_along, returns and lengths. Truncated rollouts contribute their
// partial sums and are counted.
EvalReport evaluate_policy(const Policy& policy, const Policy& reference, const EnvConfig& config,
                           std::int64_t k_test, const StreamFamily& streams, std::size_t threads = 1);

double l2_error(const Policy& policy, const Policy& reference, std::int64_t k_test, const EnvConfig& config,
                const StreamFamily& streams, std::size_t threads = 1);

// Likelihood ratio exp(-sum a_t sqrt(dt) eta_{t+1} - 1/2 sum a_t^2 dt) of the
// uncontrolled path measure w.r.t. the controlled one.
double girsanov_weight(const Trajectory& trajectory, const EnvConfig& config);

// I = exp(-g(s_T) - sum_{t<T} f dt) for a trajectory that hit the target set.
double quantity_of_interest(const Trajectory& trajectory, const EnvConfig& config);

struct IsReport {
  double mean = 0.0;
  double sample_variance = 0.0;
  double relative_error = 0.0;     // sample standard deviation / |mean|
  double mean_hitting_time = 0.0;  // in steps
  std::int64_t k = 0;              // rollouts requested
  std::int64_t truncated_count = 0;

  std::int64_t used() const { return k - truncated_count; }
  double standard_error() const;
};

// Sample statistics of I * m over k rollouts under `policy`. Truncated rollouts
// are excluded and counted. Throws std::runtime_error if fewer than two
// rollouts hit the target set.
IsReport is_estimate(const Policy& policy, const EnvConfig& config, std::int64_t k, const StreamFamily& streams,
                     std::size_t threads = 1);

// Trailing mean over `window` entries; the first entries average what is available.
std::vector<double> running_mean(std::span<const double> series, std::size_t window);

}  // namespace soc
