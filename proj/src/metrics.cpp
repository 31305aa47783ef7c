#include "soc/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "soc/parallel.hpp"

namespace soc {

namespace {

// Visited states s_0, ..., s_T.
Eigen::ArrayXd visited_states(const Trajectory& trajectory) {
  const auto steps = static_cast<Eigen::Index>(trajectory.transitions.size());
  Eigen::ArrayXd s(steps + 1);
  for (Eigen::Index t = 0; t < steps; ++t) s(t) = trajectory.transitions[static_cast<std::size_t>(t)].state;
  s(steps) = trajectory.final_state();
  return s;
}

std::vector<Engine> make_engines(const StreamFamily& streams, std::size_t begin, std::size_t end) {
  std::vector<Engine> engines;
  engines.reserve(end - begin);
  for (std::size_t k = begin; k < end; ++k) engines.push_back(streams(k));
  return engines;
}

}  // namespace

double l2_along(const Trajectory& trajectory, const Policy& policy, const Policy& reference, double dt) {
  const Eigen::ArrayXd s = visited_states(trajectory);
  Eigen::ArrayXd mu(s.size());
  Eigen::ArrayXd mu_ref(s.size());
  policy.act(s, mu);
  reference.act(s, mu_ref);
  double sum = 0.0;
  for (Eigen::Index t = 0; t < s.size(); ++t) {
    const double d = mu(t) - mu_ref(t);
    sum += d * d * dt;
  }
  return sum;
}

EvalReport evaluate_policy(const Policy& policy, const Policy& reference, const EnvConfig& config,
                           std::int64_t k_test, const StreamFamily& streams, std::size_t threads) {
  if (k_test < 1) throw std::invalid_argument("evaluate_policy: k_test must be >= 1");
  const auto k = static_cast<std::size_t>(k_test);
  std::vector<double> l2(k), returns(k), lengths(k);
  std::vector<char> truncated(k);
  for_each_chunk(k, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    auto engines = make_engines(streams, begin, end);
    const auto batch = sample_trajectories(policy, config, engines);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      l2[begin + i] = l2_along(batch[i], policy, reference, config.dt);
      returns[begin + i] = return_of(batch[i]);
      lengths[begin + i] = static_cast<double>(batch[i].hitting_steps());
      truncated[begin + i] = batch[i].truncated ? 1 : 0;
    }
  });
  EvalReport report;
  report.k = k_test;
  for (std::size_t i = 0; i < k; ++i) {
    report.l2_error += l2[i];
    report.mean_return += returns[i];
    report.mean_length += lengths[i];
    report.truncated_count += truncated[i];
  }
  report.l2_error /= static_cast<double>(k);
  report.mean_return /= static_cast<double>(k);
  report.mean_length /= static_cast<double>(k);
  return report;
}

double l2_error(const Policy& policy, const Policy& reference, std::int64_t k_test, const EnvConfig& config,
                const StreamFamily& streams, std::size_t threads) {
  return evaluate_policy(policy, reference, config, k_test, streams, threads).l2_error;
}

double girsanov_weight(const Trajectory& trajectory, const EnvConfig& config) {
  const double sqrt_dt = std::sqrt(config.dt);
  double exponent = 0.0;
  for (const auto& tr : trajectory.transitions)
    exponent -= tr.action * sqrt_dt * tr.noise + 0.5 * tr.action * tr.action * config.dt;
  return std::exp(exponent);
}

double quantity_of_interest(const Trajectory& trajectory, const EnvConfig& config) {
  const double running = config.f_const * config.dt * static_cast<double>(trajectory.hitting_steps());
  const double terminal = trajectory.truncated ? 0.0 : config.g_const;
  return std::exp(-terminal - running);
}

double IsReport::standard_error() const {
  return used() > 0 ? std::sqrt(sample_variance / static_cast<double>(used())) : 0.0;
}

IsReport is_estimate(const Policy& policy, const EnvConfig& config, std::int64_t k, const StreamFamily& streams,
                     std::size_t threads) {
  if (k < 2) throw std::invalid_argument("is_estimate: k must be >= 2");
  const auto n = static_cast<std::size_t>(k);
  std::vector<double> samples(n), steps(n);
  std::vector<char> truncated(n);
  for_each_chunk(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    auto engines = make_engines(streams, begin, end);
    const auto batch = sample_trajectories(policy, config, engines);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      truncated[begin + i] = batch[i].truncated ? 1 : 0;
      samples[begin + i] = quantity_of_interest(batch[i], config) * girsanov_weight(batch[i], config);
      steps[begin + i] = static_cast<double>(batch[i].hitting_steps());
    }
  });

  IsReport report;
  report.k = k;
  double sum = 0.0;
  double step_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truncated[i]) {
      ++report.truncated_count;
      continue;
    }
    sum += samples[i];
    step_sum += steps[i];
  }
  const auto used = report.used();
  if (used < 2) throw std::runtime_error("is_estimate: fewer than two rollouts reached the target set");
  report.mean = sum / static_cast<double>(used);
  report.mean_hitting_time = step_sum / static_cast<double>(used);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (truncated[i]) continue;
    const double d = samples[i] - report.mean;
    sq += d * d;
  }
  report.sample_variance = sq / static_cast<double>(used - 1);
  report.relative_error = std::sqrt(report.sample_variance) / std::abs(report.mean);
  return report;
}

std::vector<double> running_mean(std::span<const double> series, std::size_t window) {
  if (window < 1) throw std::invalid_argument("running_mean: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t begin = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = begin; j <= i; ++j) sum += series[j];
    out[i] = sum / static_cast<double>(i + 1 - begin);
  }
  return out;
}

}  // namespace soc
