#include "soc/reinforce.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "soc/metrics.hpp"
#include "soc/parallel.hpp"
#include "soc/rng.hpp"
#include "soc/transition_model.hpp"

namespace soc {

namespace {

// Steps per backward call; bounds the activation cache for very long paths.
constexpr std::size_t kSegment = 8192;

}  // namespace

void ReinforceConfig::validate() const {
  env.validate();
  if (batch_size < 1) throw std::invalid_argument("ReinforceConfig: batch_size must be >= 1");
  if (learning_rate < 0) throw std::invalid_argument("ReinforceConfig: learning_rate must be >= 0");
  if (n_gradient_steps < 0) throw std::invalid_argument("ReinforceConfig: n_gradient_steps must be >= 0");
  if (test_every < 1) throw std::invalid_argument("ReinforceConfig: test_every must be >= 1");
  if (k_test < 1) throw std::invalid_argument("ReinforceConfig: k_test must be >= 1");
  if (eval_max_episode_steps < 1) throw std::invalid_argument("ReinforceConfig: eval_max_episode_steps must be >= 1");
  if (!(init_halfwidth > 0)) throw std::invalid_argument("ReinforceConfig: init_halfwidth must be > 0");
  policy_spec().validate();
}

MlpSpec ReinforceConfig::policy_spec() const {
  MlpSpec spec;
  spec.layer_dims.push_back(1);
  spec.layer_dims.insert(spec.layer_dims.end(), hidden.begin(), hidden.end());
  spec.layer_dims.push_back(1);
  return spec;
}

EnvConfig ReinforceConfig::eval_env() const {
  EnvConfig e = env;
  e.max_episode_steps = eval_max_episode_steps;
  return e;
}

Eigen::VectorXd trajectory_gradient(const Trajectory& trajectory, const Mlp<double>& policy, const EnvConfig& config,
                                    ScoreTerm score) {
  if (trajectory.truncated) throw std::invalid_argument("trajectory_gradient: truncated trajectory");
  const double g0 = return_of(trajectory);
  const double sqrt_dt = std::sqrt(config.dt);
  const auto& steps = trajectory.transitions;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.num_params());
  Eigen::MatrixXd states;
  Eigen::MatrixXd upstream;
  Eigen::MatrixXd outputs;
  for (std::size_t begin = 0; begin < steps.size(); begin += kSegment) {
    const auto n = static_cast<Eigen::Index>(std::min(kSegment, steps.size() - begin));
    states.resize(1, n);
    upstream.resize(1, n);
    for (Eigen::Index t = 0; t < n; ++t) {
      const Transition& tr = steps[begin + static_cast<std::size_t>(t)];
      const double score_t = score == ScoreTerm::kRecordedNoise
                                 ? sqrt_dt * tr.noise
                                 : grad_action_log_density(tr.next_state, tr.state, tr.action, config);
      states(0, t) = tr.state;
      upstream(0, t) = -config.dt * tr.action + g0 * score_t;
    }
    grad += policy.backward(states, upstream, &outputs).params;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double a = steps[begin + static_cast<std::size_t>(t)].action;
      if (std::abs(outputs(0, t) - a) > 1e-9 * (1.0 + std::abs(a)))
        throw std::invalid_argument("trajectory_gradient: actions were not produced by these parameters");
    }
  }
  return grad;
}

Eigen::VectorXd estimate_gradient(std::span<const Trajectory> batch, const Mlp<double>& policy,
                                  const EnvConfig& config, ScoreTerm score) {
  if (batch.empty()) throw std::invalid_argument("estimate_gradient: empty batch");
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.num_params());
  for (const auto& tr : batch) grad += trajectory_gradient(tr, policy, config, score);
  return grad / static_cast<double>(batch.size());
}

ReinforceRecord train_reinforce(const ReinforceConfig& config, const Policy& reference, const ReinforceHooks& hooks) {
  config.validate();
  Engine init_rng = make_stream(config.seed, StreamTag::kInit);
  Mlp<double> net = init_params<double>(config.policy_spec(), config.init_halfwidth, init_rng);
  AdamState<double> adam(net.num_params(), config.learning_rate);

  const EnvConfig eval_env = config.eval_env();
  const StreamFamily eval_streams{config.seed, StreamTag::kEvaluation, 0};
  const auto k = static_cast<std::size_t>(config.batch_size);
  const std::size_t chunks = num_chunks(k);

  ReinforceRecord record;
  std::int64_t excluded_since_test = 0;
  auto test = [&](std::int64_t step) {
    const NetworkPolicy snapshot(net);
    const EvalReport eval = evaluate_policy(snapshot, reference, eval_env, config.k_test, eval_streams, config.threads);
    ReinforceTestPoint point{step, eval.l2_error, eval.mean_return, eval.mean_length, eval.truncated_count,
                             excluded_since_test};
    excluded_since_test = 0;
    record.points.push_back(point);
    if (hooks.on_test) hooks.on_test(point, net);
  };

  test(0);
  for (std::int64_t step = 1; step <= config.n_gradient_steps; ++step) {
    // The snapshot both generates the batch and is differentiated.
    const NetworkPolicy snapshot(net);
    const StreamFamily streams{config.seed, StreamTag::kRollout, static_cast<std::uint64_t>(step)};
    std::vector<Eigen::VectorXd> chunk_grads(chunks);
    std::vector<std::int64_t> chunk_used(chunks, 0);
    for_each_chunk(k, config.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
      std::vector<Engine> engines;
      for (std::size_t i = begin; i < end; ++i) engines.push_back(streams(i));
      const auto batch = sample_trajectories(snapshot, config.env, engines);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(snapshot.network().num_params());
      for (const auto& tr : batch) {
        if (tr.truncated) continue;
        g += trajectory_gradient(tr, snapshot.network(), config.env);
        ++chunk_used[c];
      }
      chunk_grads[c] = std::move(g);
    });

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.num_params());
    std::int64_t used = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      grad += chunk_grads[c];
      used += chunk_used[c];
    }
    excluded_since_test += config.batch_size - used;
    if (used == 0) throw std::runtime_error("train_reinforce: every trajectory in the batch was truncated");
    grad /= static_cast<double>(used);

    // Ascend E[G_0]: Adam descends the negated estimate.
    const Eigen::VectorXd descent = -grad;
    adam_update(net.params(), descent, adam);

    if (step % config.test_every == 0 || step == config.n_gradient_steps) test(step);
  }
  record.policy = std::move(net);
  return record;
}

}  // namespace soc
