#include "soc/td3.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soc/metrics.hpp"

namespace soc {

void Td3Config::validate() const {
  env.validate();
  if (n_episodes < 0) throw std::invalid_argument("Td3Config: n_episodes must be >= 0");
  if (buffer_capacity < 1) throw std::invalid_argument("Td3Config: buffer_capacity must be >= 1");
  if (learning_starts < 0) throw std::invalid_argument("Td3Config: learning_starts must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("Td3Config: batch_size must be >= 1");
  if (actor_lr < 0 || critic_lr < 0) throw std::invalid_argument("Td3Config: learning rates must be >= 0");
  if (train_every < 1) throw std::invalid_argument("Td3Config: train_every must be >= 1");
  if (critic_updates_per_train < 0) throw std::invalid_argument("Td3Config: critic_updates_per_train must be >= 0");
  if (policy_delay < 1) throw std::invalid_argument("Td3Config: policy_delay must be >= 1");
  if (sigma_expl < 0 || sigma_target < 0) throw std::invalid_argument("Td3Config: noise scales must be >= 0");
  if (!(polyak > 0 && polyak < 1)) throw std::invalid_argument("Td3Config: polyak must lie in (0, 1)");
  if (!(action_low < action_high)) throw std::invalid_argument("Td3Config: action_low must be < action_high");
  if (test_every < 1) throw std::invalid_argument("Td3Config: test_every must be >= 1");
  if (k_test < 1) throw std::invalid_argument("Td3Config: k_test must be >= 1");
  if (eval_max_episode_steps < 1) throw std::invalid_argument("Td3Config: eval_max_episode_steps must be >= 1");
  if (!(actor_init_halfwidth > 0 && critic_init_halfwidth > 0))
    throw std::invalid_argument("Td3Config: init halfwidths must be > 0");
  actor_spec().validate();
}

MlpSpec Td3Config::actor_spec() const {
  MlpSpec spec;
  spec.layer_dims.push_back(1);
  spec.layer_dims.insert(spec.layer_dims.end(), hidden.begin(), hidden.end());
  spec.layer_dims.push_back(1);
  return spec;
}

MlpSpec Td3Config::critic_spec() const {
  MlpSpec spec = actor_spec();
  spec.layer_dims.front() = 2;
  return spec;
}

EnvConfig Td3Config::eval_env() const {
  EnvConfig e = env;
  e.max_episode_steps = eval_max_episode_steps;
  return e;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be >= 1");
}

void ReplayBuffer::add(const Transition& transition) {
  if (data_.size() < capacity_) {
    data_.push_back(transition);
  } else {
    data_[cursor_] = transition;
  }
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

const Transition& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer: index out of range");
  const std::size_t oldest = size_ < capacity_ ? 0 : cursor_;
  return data_[(oldest + i) % capacity_];
}

ReplayBuffer::Batch ReplayBuffer::sample(std::size_t k, Engine& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  const auto n = static_cast<Eigen::Index>(k);
  Batch b;
  b.states.resize(n);
  b.actions.resize(n);
  b.rewards.resize(n);
  b.next_states.resize(n);
  b.dones.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& tr = data_[pick(rng)];
    b.states(i) = tr.state;
    b.actions(i) = tr.action;
    b.rewards(i) = tr.reward;
    b.next_states(i) = tr.next_state;
    b.dones(i) = tr.done ? 1.0 : 0.0;
  }
  return b;
}

ActorCriticState ActorCriticState::initialize(const Td3Config& config, Engine& rng) {
  ActorCriticState s;
  s.actor = init_params<double>(config.actor_spec(), config.actor_init_halfwidth, rng);
  s.critic1 = init_params<double>(config.critic_spec(), config.critic_init_halfwidth, rng);
  s.critic2 = init_params<double>(config.critic_spec(), config.critic_init_halfwidth, rng);
  s.actor_target = s.actor;
  s.critic1_target = s.critic1;
  s.critic2_target = s.critic2;
  s.actor_opt = AdamState<double>(s.actor.num_params(), config.actor_lr);
  s.critic1_opt = AdamState<double>(s.critic1.num_params(), config.critic_lr);
  s.critic2_opt = AdamState<double>(s.critic2.num_params(), config.critic_lr);
  return s;
}

Eigen::MatrixXd critic_inputs(const Eigen::RowVectorXd& states, const Eigen::RowVectorXd& actions) {
  Eigen::MatrixXd z(2, states.size());
  z.row(0) = states;
  z.row(1) = actions;
  return z;
}

double select_action(const Mlp<double>& actor, double s, double sigma_expl, double low, double high, bool warmup,
                     Engine& rng) {
  if (warmup) return std::uniform_real_distribution<double>(low, high)(rng);
  double a = actor(s);
  if (sigma_expl > 0) a += std::normal_distribution<double>(0.0, sigma_expl)(rng);
  return std::clamp(a, low, high);
}

Eigen::RowVectorXd compute_targets(const ReplayBuffer::Batch& batch, const ActorCriticState& state,
                                   const Td3Config& config, Engine& rng) {
  Eigen::RowVectorXd next_actions = state.actor_target.forward(batch.next_states);
  if (config.sigma_target > 0) {
    std::normal_distribution<double> noise(0.0, config.sigma_target);
    for (Eigen::Index i = 0; i < next_actions.size(); ++i) next_actions(i) += noise(rng);
  }
  next_actions = next_actions.array().cwiseMax(config.action_low).cwiseMin(config.action_high);
  const Eigen::MatrixXd z = critic_inputs(batch.next_states, next_actions);
  const Eigen::RowVectorXd q1 = state.critic1_target.forward(z);
  const Eigen::RowVectorXd q2 = state.critic2_target.forward(z);
  return batch.rewards.array() + (1.0 - batch.dones.array()) * q1.array().min(q2.array());
}

std::pair<double, Eigen::VectorXd> critic_loss_gradient(const Mlp<double>& critic, const ReplayBuffer::Batch& batch,
                                                        const Eigen::RowVectorXd& targets) {
  const auto tape = critic.record(critic_inputs(batch.states, batch.actions));
  const Eigen::RowVectorXd residual = tape.outputs.row(0) - targets;
  const double k = static_cast<double>(batch.size());
  const double loss = residual.squaredNorm() / k;
  const Eigen::MatrixXd upstream = (2.0 / k) * residual;
  return {loss, critic.backward(tape, upstream).params};
}

std::pair<double, Eigen::VectorXd> actor_objective_gradient(const Mlp<double>& actor, const Mlp<double>& critic,
                                                            const Eigen::RowVectorXd& states) {
  const double k = static_cast<double>(states.size());
  const auto actor_tape = actor.record(states);
  const auto critic_tape = critic.record(critic_inputs(states, actor_tape.outputs.row(0)));
  const double objective = critic_tape.outputs.sum() / k;
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(1, states.size(), 1.0 / k);
  const auto critic_grads = critic.backward(critic_tape, ones);
  // dQ/da is the action row of the critic's input gradient.
  return {objective, actor.backward(actor_tape, critic_grads.inputs.row(1)).params};
}

void critic_update(const ReplayBuffer::Batch& batch, const Eigen::RowVectorXd& targets, ActorCriticState& state) {
  const Eigen::VectorXd g1 = critic_loss_gradient(state.critic1, batch, targets).second;
  const Eigen::VectorXd g2 = critic_loss_gradient(state.critic2, batch, targets).second;
  adam_update(state.critic1.params(), g1, state.critic1_opt);
  adam_update(state.critic2.params(), g2, state.critic2_opt);
}

void actor_update(const ReplayBuffer::Batch& batch, ActorCriticState& state) {
  const Eigen::VectorXd ascent = actor_objective_gradient(state.actor, state.critic1, batch.states).second;
  const Eigen::VectorXd descent = -ascent;
  adam_update(state.actor.params(), descent, state.actor_opt);
}

void soft_update(ActorCriticState& state, double rho) {
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("soft_update: rho must lie in (0, 1)");
  polyak_average(state.actor_target, state.actor, rho);
  polyak_average(state.critic1_target, state.critic1, rho);
  polyak_average(state.critic2_target, state.critic2, rho);
}

NetworkPolicy greedy_policy(const ActorCriticState& state, const Td3Config& config) {
  return NetworkPolicy(state.actor, config.action_low, config.action_high);
}

Td3Record train_td3(const Td3Config& config, const Policy& reference, const Td3Hooks& hooks) {
  config.validate();
  Engine init_rng = make_stream(config.seed, StreamTag::kInit);
  Engine explore_rng = make_stream(config.seed, StreamTag::kExploration);
  Engine env_rng = make_stream(config.seed, StreamTag::kEnvNoise);
  Engine replay_rng = make_stream(config.seed, StreamTag::kReplay);
  Engine target_rng = make_stream(config.seed, StreamTag::kTargetNoise);
  const StreamFamily eval_streams{config.seed, StreamTag::kEvaluation, 0};
  const EnvConfig eval_env = config.eval_env();
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  Td3Record record;
  record.state = ActorCriticState::initialize(config, init_rng);
  ActorCriticState& state = record.state;
  ReplayBuffer buffer(config.buffer_capacity);
  std::normal_distribution<double> normal;

  auto train_phase = [&] {
    for (std::int64_t j = 0; j < config.critic_updates_per_train; ++j) {
      const auto batch = buffer.sample(batch_size, replay_rng);
      const Eigen::RowVectorXd y = compute_targets(batch, state, config, target_rng);
      critic_update(batch, y, state);
      if (j % config.policy_delay == 0) {
        actor_update(batch, state);
        soft_update(state, config.polyak);
      }
    }
    ++record.train_phases;
  };

  // Returns true when the caller asked to stop.
  auto test = [&](std::int64_t episode) {
    const NetworkPolicy actor = greedy_policy(state, config);
    const EvalReport eval = evaluate_policy(actor, reference, eval_env, config.k_test, eval_streams, config.threads);
    const Td3TestPoint point{episode, eval.l2_error, eval.mean_return, eval.mean_length, eval.truncated_count};
    record.points.push_back(point);
    if (hooks.on_test) hooks.on_test(point, state);
    return hooks.should_stop && hooks.should_stop(point);
  };

  if (test(0)) return record;
  for (std::int64_t episode = 1; episode <= config.n_episodes; ++episode) {
    double s = config.env.s_init;
    EpisodeLog log{episode, 0.0, 0};
    for (std::int64_t t = 0; t < config.env.max_episode_steps; ++t) {
      const bool warmup = record.total_steps < config.learning_starts;
      const double a =
          select_action(state.actor, s, config.sigma_expl, config.action_low, config.action_high, warmup, explore_rng);
      const double eta = normal(env_rng);
      const StepResult r = env_step(s, a, eta, config.env);
      buffer.add({s, a, r.reward, r.next_state, r.done, eta});
      log.episode_return += r.reward;
      ++log.length;
      s = r.next_state;
      ++record.total_steps;
      if (record.total_steps >= config.learning_starts && record.total_steps % config.train_every == 0) train_phase();
      if (r.done) break;
    }
    record.episodes.push_back(log);
    if (episode % config.test_every == 0 || episode == config.n_episodes) {
      if (test(episode)) break;
    }
  }
  return record;
}

Eigen::RowVectorXd advantage(const ActorCriticState& state, const Eigen::RowVectorXd& states,
                             const Eigen::RowVectorXd& actions) {
  const Eigen::RowVectorXd own = state.actor.forward(states);
  const Eigen::RowVectorXd q = state.critic1.forward(critic_inputs(states, actions));
  const Eigen::RowVectorXd v = state.critic1.forward(critic_inputs(states, own));
  return q - v;
}

AdvantageTable advantage_diagnostic(const ActorCriticState& state, const Eigen::VectorXd& states,
                                    const Eigen::VectorXd& actions) {
  const Eigen::Index ns = states.size();
  const Eigen::Index na = actions.size();
  if (ns == 0 || na == 0) throw std::invalid_argument("advantage_diagnostic: empty grid");
  AdvantageTable table;
  table.states = states;
  table.actions = actions;
  table.q_values.resize(ns, na);
  table.advantages.resize(ns, na);
  table.greedy_actions.resize(ns);

  const Eigen::RowVectorXd s_row = states.transpose();
  const Eigen::RowVectorXd own_actions = state.actor.forward(s_row);
  const Eigen::RowVectorXd values = state.critic1.forward(critic_inputs(s_row, own_actions));
  for (Eigen::Index j = 0; j < na; ++j) {
    const Eigen::RowVectorXd a_row = Eigen::RowVectorXd::Constant(ns, actions(j));
    table.q_values.col(j) = state.critic1.forward(critic_inputs(s_row, a_row)).row(0).transpose();
  }
  for (Eigen::Index i = 0; i < ns; ++i) {
    table.advantages.row(i) = table.q_values.row(i).array() - values(i);
    Eigen::Index best = 0;
    table.q_values.row(i).maxCoeff(&best);
    table.greedy_actions(i) = actions(best);
  }
  return table;
}

}  // namespace soc
