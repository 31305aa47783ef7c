#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "soc/env.hpp"
#include "soc/neural.hpp"
#include "soc/policy.hpp"

namespace soc {

struct ReinforceConfig {
  EnvConfig env;                        // training rollouts; max_episode_steps effectively uncapped
  std::int64_t batch_size = 1000;       // K
  double learning_rate = 5e-4;
  std::int64_t n_gradient_steps = 10000;
  std::int64_t test_every = 100;
  std::int64_t k_test = 1000;
  std::int64_t eval_max_episode_steps = 100000;
  std::vector<Eigen::Index> hidden = {32, 32};
  double init_halfwidth = 1e-2;         // final-layer initialization
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  MlpSpec policy_spec() const;
  EnvConfig eval_env() const;
};

// Which per-step score term multiplies the return.
enum class ScoreTerm {
  kRecordedNoise,    // sqrt(dt) * eta_{t+1}
  kDensityGradient,  // d/da log p(s_{t+1} | s_t, a) at a = mu(s_t)
};

// Unnormalized contribution of one trajectory,
//   sum_t [ -dt mu(s_t) + G_0 * score_t ] grad_theta mu(s_t),
// i.e. the per-path gradient of the expected return. Throws std::invalid_argument
// for a truncated trajectory or when the recorded actions were not produced by `policy`.
Eigen::VectorXd trajectory_gradient(const Trajectory& trajectory, const Mlp<double>& policy, const EnvConfig& config,
                                    ScoreTerm score = ScoreTerm::kRecordedNoise);

// Batch mean of trajectory_gradient: the closed-form model-based estimate of the
// gradient of J = E[G_0]. Training ascends it.
Eigen::VectorXd estimate_gradient(std::span<const Trajectory> batch, const Mlp<double>& policy,
                                  const EnvConfig& config, ScoreTerm score = ScoreTerm::kRecordedNoise);

struct ReinforceTestPoint {
  std::int64_t step = 0;
  double l2_error = 0.0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  std::int64_t truncated_count = 0;        // evaluation rollouts that hit the step cap
  std::int64_t batch_truncated_count = 0;  // training rollouts excluded since the previous test point
};

struct ReinforceRecord {
  std::vector<ReinforceTestPoint> points;
  Mlp<double> policy;
};

struct ReinforceHooks {
  // Called at every test point with the parameters that were evaluated.
  std::function<void(const ReinforceTestPoint&, const Mlp<double>&)> on_test;
};

// Online training loop: sample K fresh trajectories with the current parameters,
// estimate the gradient, take one Adam ascent step. Every test_every steps the
// policy is evaluated against `reference` on the held-out evaluation streams.
ReinforceRecord train_reinforce(const ReinforceConfig& config, const Policy& reference,
                                const ReinforceHooks& hooks = {});

}  // namespace soc
