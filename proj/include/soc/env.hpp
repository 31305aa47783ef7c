#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "soc/policy.hpp"
#include "soc/rng.hpp"

namespace soc {

// Physical and discretization parameters of the controlled double-well Langevin MDP.
struct EnvConfig {
  double alpha = 1.0;      // barrier height
  double beta = 1.0;       // inverse temperature
  double dt = 0.005;       // time step
  double s_init = -1.0;    // start state
  double target_lb = 1.0;  // target set is [target_lb, inf)
  double state_lb = -2.0;  // diagnostic/grid domain only, never enforced on the dynamics
  double state_ub = 2.0;
  double f_const = 1.0;    // running cost
  double g_const = 0.0;    // terminal cost
  std::int64_t max_episode_steps = 100'000'000;

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;
};

// Diffusion constant sqrt(2 / beta).
double sigma(const EnvConfig& config);

inline double potential(double s, double alpha) {
  const double w = s * s - 1.0;
  return alpha * w * w;
}

inline double grad_potential(double s, double alpha) { return 4.0 * alpha * s * (s * s - 1.0); }

inline bool is_terminal(double s, const EnvConfig& config) { return s >= config.target_lb; }

// Per-step reward: running cost when not terminal, terminal cost -g otherwise.
double reward(double s, double a, bool terminal, const EnvConfig& config);

struct StepResult {
  double next_state = 0.0;
  double reward = 0.0;
  bool done = false;
};

// One Euler-Maruyama step driven by the caller's standard normal draw `eta`.
// The step that enters the target set also carries the terminal reward -g(next_state).
StepResult env_step(double s, double a, double eta, const EnvConfig& config);

struct Transition {
  double state = 0.0;
  double action = 0.0;
  double reward = 0.0;
  double next_state = 0.0;
  bool done = false;
  double noise = 0.0;
};

struct Trajectory {
  std::vector<Transition> transitions;
  bool truncated = false;

  std::int64_t hitting_steps() const { return static_cast<std::int64_t>(transitions.size()); }
  // s_T. Sampled trajectories hold at least one transition since max_episode_steps >= 1.
  double final_state() const { return transitions.back().next_state; }
};

// Rolls out one episode from config.s_init until the target set is hit or
// config.max_episode_steps steps have been taken.
Trajectory sample_trajectory(const Policy& policy, const EnvConfig& config, Engine& rng);

// Rolls out one episode per engine, advancing all of them in lockstep so the
// policy is queried once per step for the whole active set. Trajectory k is
// driven exclusively by engines[k].
std::vector<Trajectory> sample_trajectories(const Policy& policy, const EnvConfig& config,
                                            std::span<Engine> engines);

// Sum of recorded rewards G_0.
double return_of(const Trajectory& trajectory);

// g(s_T) + sum f dt + 1/2 sum a^2 dt evaluated from the recorded states and actions.
double cost_of(const Trajectory& trajectory, const EnvConfig& config);

}  // namespace soc
