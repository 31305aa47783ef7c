#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "soc/env.hpp"
#include "soc/neural.hpp"
#include "soc/policy.hpp"
#include "soc/rng.hpp"

namespace soc {

struct Td3Config {
  EnvConfig env = [] {
    EnvConfig e;
    e.max_episode_steps = 1000;
    return e;
  }();
  std::int64_t n_episodes = 4000;
  std::size_t buffer_capacity = 1'000'000;
  std::int64_t learning_starts = 10'000;  // uniform random actions before this many steps
  std::int64_t batch_size = 1000;
  double actor_lr = 1e-4;
  double critic_lr = 1e-4;
  std::int64_t train_every = 100;
  std::int64_t critic_updates_per_train = 100;
  std::int64_t policy_delay = 2;
  double sigma_expl = 1.0;
  double sigma_target = 0.2;
  double polyak = 0.995;
  double action_low = -5.0;
  double action_high = 5.0;
  std::int64_t test_every = 100;  // episodes
  std::int64_t k_test = 1000;
  std::int64_t eval_max_episode_steps = 100000;
  std::vector<Eigen::Index> hidden = {32, 32};
  double actor_init_halfwidth = 1e-2;
  double critic_init_halfwidth = 1e-3;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  MlpSpec actor_spec() const;   // s -> a
  MlpSpec critic_spec() const;  // (s, a) -> Q
  EnvConfig eval_env() const;
};

// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void add(const Transition& transition);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  // i-th oldest stored transition, i < size().
  const Transition& operator[](std::size_t i) const;

  struct Batch {
    Eigen::RowVectorXd states;
    Eigen::RowVectorXd actions;
    Eigen::RowVectorXd rewards;
    Eigen::RowVectorXd next_states;
    Eigen::RowVectorXd dones;

    Eigen::Index size() const { return states.size(); }
  };

  // Uniform with replacement over the current contents.
  Batch sample(std::size_t k, Engine& rng) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::vector<Transition> data_;
};

struct ActorCriticState {
  Mlp<double> actor;
  Mlp<double> critic1;
  Mlp<double> critic2;
  Mlp<double> actor_target;
  Mlp<double> critic1_target;
  Mlp<double> critic2_target;
  AdamState<double> actor_opt;
  AdamState<double> critic1_opt;
  AdamState<double> critic2_opt;

  // Fresh networks; targets start as copies of the online networks.
  static ActorCriticState initialize(const Td3Config& config, Engine& rng);
};

// Stacks states over actions into critic inputs.
Eigen::MatrixXd critic_inputs(const Eigen::RowVectorXd& states, const Eigen::RowVectorXd& actions);

// clip(mu(s) + N(0, sigma_expl), low, high); uniform on [low, high] during warm-up.
double select_action(const Mlp<double>& actor, double s, double sigma_expl, double low, double high, bool warmup,
                     Engine& rng);

// y = r + (1 - d) min_i Q'_i(s', clip(mu'(s') + N(0, sigma_target), low, high)); no discounting.
Eigen::RowVectorXd compute_targets(const ReplayBuffer::Batch& batch, const ActorCriticState& state,
                                   const Td3Config& config, Engine& rng);

// (1/K) sum (Q(s, a) - y)^2 and its parameter gradient.
std::pair<double, Eigen::VectorXd> critic_loss_gradient(const Mlp<double>& critic, const ReplayBuffer::Batch& batch,
                                                        const Eigen::RowVectorXd& targets);

// (1/K) sum Q(s, mu(s)) and its gradient with respect to the actor parameters.
std::pair<double, Eigen::VectorXd> actor_objective_gradient(const Mlp<double>& actor, const Mlp<double>& critic,
                                                            const Eigen::RowVectorXd& states);

// One Adam descent step on each critic's mean squared Bellman error, shared targets.
void critic_update(const ReplayBuffer::Batch& batch, const Eigen::RowVectorXd& targets, ActorCriticState& state);

// One Adam ascent step on the batch mean of Q_1(s, mu(s)).
void actor_update(const ReplayBuffer::Batch& batch, ActorCriticState& state);

// Polyak averaging of all three target networks.
void soft_update(ActorCriticState& state, double rho);

struct Td3TestPoint {
  std::int64_t episode = 0;
  double l2_error = 0.0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  std::int64_t truncated_count = 0;
};

struct EpisodeLog {
  std::int64_t episode = 0;
  double episode_return = 0.0;
  std::int64_t length = 0;
};

struct Td3Record {
  std::vector<Td3TestPoint> points;
  std::vector<EpisodeLog> episodes;
  std::int64_t total_steps = 0;
  std::int64_t train_phases = 0;
  ActorCriticState state;
};

struct Td3Hooks {
  std::function<void(const Td3TestPoint&, const ActorCriticState&)> on_test;
  // Returning true after a test point ends training early.
  std::function<bool(const Td3TestPoint&)> should_stop;
};

// Noiseless, clipped actor used at test time.
NetworkPolicy greedy_policy(const ActorCriticState& state, const Td3Config& config);

Td3Record train_td3(const Td3Config& config, const Policy& reference, const Td3Hooks& hooks = {});

struct AdvantageTable {
  Eigen::VectorXd states;
  Eigen::VectorXd actions;
  Eigen::MatrixXd q_values;    // rows: states, cols: actions
  Eigen::MatrixXd advantages;  // Q(s, a) - Q(s, mu(s))
  Eigen::VectorXd greedy_actions;  // argmax over the action grid, per state
};

// A(s, a) = Q_1(s, a) - Q_1(s, mu(s)), pointwise.
Eigen::RowVectorXd advantage(const ActorCriticState& state, const Eigen::RowVectorXd& states,
                             const Eigen::RowVectorXd& actions);

// Q_1, the advantage against the actor's own action, and the grid-greedy policy.
AdvantageTable advantage_diagnostic(const ActorCriticState& state, const Eigen::VectorXd& states,
                                    const Eigen::VectorXd& actions);

}  // namespace soc
