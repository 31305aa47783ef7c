#include "soc/env.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace soc {

void EnvConfig::validate() const {
  if (!(dt > 0)) throw std::invalid_argument("EnvConfig: dt must be > 0");
  if (!(beta > 0)) throw std::invalid_argument("EnvConfig: beta must be > 0");
  if (!(alpha > 0)) throw std::invalid_argument("EnvConfig: alpha must be > 0");
  if (max_episode_steps < 1) throw std::invalid_argument("EnvConfig: max_episode_steps must be >= 1");
  if (!(s_init < target_lb)) throw std::invalid_argument("EnvConfig: s_init must lie outside the target set");
  if (!(state_lb < state_ub)) throw std::invalid_argument("EnvConfig: state_lb must be < state_ub");
}

double sigma(const EnvConfig& config) { return std::sqrt(2.0 / config.beta); }

double reward(double /*s*/, double a, bool terminal, const EnvConfig& config) {
  if (terminal) return -config.g_const;
  return -config.f_const * config.dt - 0.5 * a * a * config.dt;
}

StepResult env_step(double s, double a, double eta, const EnvConfig& config) {
  const double sig = sigma(config);
  StepResult out;
  out.next_state = s + (-grad_potential(s, config.alpha) + sig * a) * config.dt + sig * std::sqrt(config.dt) * eta;
  out.done = is_terminal(out.next_state, config);
  out.reward = reward(s, a, false, config);
  if (out.done) out.reward += reward(out.next_state, 0.0, true, config);
  return out;
}

Trajectory sample_trajectory(const Policy& policy, const EnvConfig& config, Engine& rng) {
  auto batch = sample_trajectories(policy, config, std::span<Engine>(&rng, 1));
  return std::move(batch.front());
}

std::vector<Trajectory> sample_trajectories(const Policy& policy, const EnvConfig& config,
                                            std::span<Engine> engines) {
  config.validate();
  const std::size_t n = engines.size();
  std::vector<Trajectory> out(n);
  std::vector<std::normal_distribution<double>> normals(n);
  std::vector<double> state(n, config.s_init);
  std::vector<std::size_t> active(n);
  std::iota(active.begin(), active.end(), std::size_t{0});

  Eigen::ArrayXd states;
  Eigen::ArrayXd actions;
  for (std::int64_t step = 0; step < config.max_episode_steps && !active.empty(); ++step) {
    const auto m = static_cast<Eigen::Index>(active.size());
    states.resize(m);
    actions.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) states(i) = state[active[static_cast<std::size_t>(i)]];
    policy.act(states, actions);

    std::size_t kept = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::size_t k = active[static_cast<std::size_t>(i)];
      const double eta = normals[k](engines[k]);
      const StepResult r = env_step(state[k], actions(i), eta, config);
      out[k].transitions.push_back({state[k], actions(i), r.reward, r.next_state, r.done, eta});
      state[k] = r.next_state;
      if (!r.done) active[kept++] = k;
    }
    active.resize(kept);
  }
  for (std::size_t k : active) out[k].truncated = true;
  return out;
}

double return_of(const Trajectory& trajectory) {
  double g = 0.0;
  for (const auto& tr : trajectory.transitions) g += tr.reward;
  return g;
}

double cost_of(const Trajectory& trajectory, const EnvConfig& config) {
  double running = 0.0;
  double control = 0.0;
  for (const auto& tr : trajectory.transitions) {
    running += config.f_const * config.dt;
    control += 0.5 * tr.action * tr.action * config.dt;
  }
  const bool hit = !trajectory.transitions.empty() && trajectory.transitions.back().done;
  return (hit ? config.g_const : 0.0) + running + control;
}

}  // namespace soc
