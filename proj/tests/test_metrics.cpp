#include <doctest.h>

#include <cmath>

#include "soc/env.hpp"
#include "soc/hjb.hpp"
#include "soc/metrics.hpp"
#include "soc/neural.hpp"
#include "soc/policy.hpp"
#include "soc/rng.hpp"

using namespace soc;

TEST_CASE("L2 error against itself is zero") {
  EnvConfig cfg;
  const auto ref = policy_from_solution(solve_bvp(cfg, Grid{}));
  const StreamFamily streams{1, StreamTag::kEvaluation, 0};
  const auto rep = evaluate_policy(ref, ref, cfg, 50, streams);
  CHECK(rep.l2_error == 0.0);
  CHECK(rep.k == 50);
  CHECK(rep.mean_return < 0);
  CHECK(l2_error(ref, ref, 50, cfg, streams) == 0.0);
}

TEST_CASE("L2 error of zero control against an independent reverse-order sum") {
  EnvConfig cfg;
  const auto ref = policy_from_solution(solve_bvp(cfg, Grid{}));
  const ZeroPolicy zero;
  const StreamFamily streams{2, StreamTag::kEvaluation, 0};
  const std::int64_t k = 200;
  const double l2 = l2_error(zero, ref, k, cfg, streams);

  double total = 0;
  for (std::int64_t i = k - 1; i >= 0; --i) {
    Engine rng = streams(static_cast<std::uint64_t>(i));
    const auto traj = sample_trajectory(zero, cfg, rng);
    double path = 0;
    const double last = ref.at(traj.final_state());
    path += last * last * cfg.dt;
    for (auto it = traj.transitions.rbegin(); it != traj.transitions.rend(); ++it) {
      const double u = ref.at(it->state);
      path += u * u * cfg.dt;
    }
    total += path;
  }
  CHECK(std::abs(l2 - total / k) < 1e-10);

  // Thread count does not change the result.
  CHECK(l2_error(zero, ref, k, cfg, streams, 4) == l2);
}

TEST_CASE("truncated evaluation rollouts keep their partial sums") {
  EnvConfig cfg;
  cfg.max_episode_steps = 10;
  const FunctionPolicy one([](double) { return 1.0; });
  const ZeroPolicy zero;
  const auto rep = evaluate_policy(one, zero, cfg, 20, StreamFamily{3, StreamTag::kEvaluation, 0});
  CHECK(rep.truncated_count == 20);
  CHECK(rep.mean_length == 10.0);
  // Ten visited states plus s_T, each contributing 1 * dt.
  CHECK(rep.l2_error == doctest::Approx(11 * cfg.dt));
}

TEST_CASE("Girsanov weight") {
  EnvConfig cfg;
  Trajectory one;
  one.transitions.push_back({0.0, 1.0, 0.0, 0.0, false, 0.0});
  CHECK(girsanov_weight(one, cfg) == doctest::Approx(std::exp(-0.0025)).epsilon(1e-14));

  Engine rng = make_stream(4, StreamTag::kEstimator);
  const auto traj = sample_trajectory(ZeroPolicy{}, cfg, rng);
  CHECK(girsanov_weight(traj, cfg) == 1.0);
  CHECK(quantity_of_interest(traj, cfg) ==
        doctest::Approx(std::exp(-cfg.dt * static_cast<double>(traj.hitting_steps()))).epsilon(1e-12));
}

TEST_CASE("zero control reduces to plain Monte Carlo") {
  EnvConfig cfg;
  const StreamFamily streams{5, StreamTag::kEstimator, 0};
  const auto rep = is_estimate(ZeroPolicy{}, cfg, 300, streams);
  double sum = 0, sum_t = 0;
  for (std::uint64_t k = 0; k < 300; ++k) {
    Engine rng = streams(k);
    const auto traj = sample_trajectory(ZeroPolicy{}, cfg, rng);
    sum += std::exp(-cfg.dt * static_cast<double>(traj.hitting_steps()));
    sum_t += static_cast<double>(traj.hitting_steps());
  }
  CHECK(rep.mean == doctest::Approx(sum / 300).epsilon(1e-12));
  CHECK(rep.mean_hitting_time == doctest::Approx(sum_t / 300).epsilon(1e-12));
  CHECK(rep.relative_error == doctest::Approx(std::sqrt(rep.sample_variance) / rep.mean));
  CHECK(rep.standard_error() == doctest::Approx(std::sqrt(rep.sample_variance / 300)));
}

TEST_CASE("reweighting is unbiased") {
  EnvConfig cfg;
  const auto ref = policy_from_solution(solve_bvp(cfg, Grid{}));
  const auto plain = is_estimate(ZeroPolicy{}, cfg, 1000, StreamFamily{6, StreamTag::kEstimator, 0});
  const auto is = is_estimate(ref, cfg, 1000, StreamFamily{7, StreamTag::kEstimator, 0});
  const double se = std::hypot(plain.standard_error(), is.standard_error());
  CHECK(std::abs(plain.mean - is.mean) < 3 * se);
  CHECK(is.relative_error * 5 < plain.relative_error);
  CHECK(is.mean_hitting_time < plain.mean_hitting_time);
}

TEST_CASE("Girsanov weights average to one") {
  EnvConfig cfg;
  cfg.f_const = 0;
  cfg.g_const = 0;
  // Mild control: strong ones make the weights heavy-tailed and the sample mean unreliable.
  const FunctionPolicy push([](double s) { return 0.3 + 0.1 * s; });
  const auto rep = is_estimate(push, cfg, 2000, StreamFamily{8, StreamTag::kEstimator, 0});
  CHECK(std::abs(rep.mean - 1) < 3 * rep.standard_error());
}

TEST_CASE("Jensen direction") {
  for (double beta : {1.0, 2.0}) {
    EnvConfig cfg;
    cfg.beta = beta;
    const auto rep = is_estimate(ZeroPolicy{}, cfg, 500, StreamFamily{9, StreamTag::kEstimator, 0});
    CHECK(rep.mean >= std::exp(-rep.mean_hitting_time * cfg.dt));
  }
}

TEST_CASE("estimator needs two completed rollouts") {
  EnvConfig cfg;
  cfg.max_episode_steps = 1;
  CHECK_THROWS_AS(is_estimate(ZeroPolicy{}, cfg, 10, StreamFamily{}), std::runtime_error);
}

TEST_CASE("running mean") {
  const std::vector<double> x{3, -1, 4, 1, 5};
  CHECK(running_mean(x, 1) == x);
  const std::vector<double> c(6, 2.5);
  CHECK(running_mean(c, 4) == c);
  const std::vector<double> two{0, 1};
  CHECK(running_mean(two, 2) == std::vector<double>{0, 0.5});
  const auto r = running_mean(x, 3);
  CHECK(r[4] == doctest::Approx(10.0 / 3));
  CHECK(running_mean(std::vector<double>{}, 3).empty());
  CHECK_THROWS_AS(running_mean(x, 0), std::invalid_argument);
}

TEST_CASE("reweighted estimate is unbiased for any bounded control") {
  EnvConfig cfg;
  const auto plain = is_estimate(ZeroPolicy{}, cfg, 10000, StreamFamily{10, StreamTag::kEstimator, 0});
  Engine init = make_stream(10, StreamTag::kInit);
  const NetworkPolicy net(init_params<double>(MlpSpec{{1, 4, 1}}, 0.5, init));
  const auto hjb = policy_from_solution(solve_bvp(cfg, Grid{}));
  const std::vector<const Policy*> controls{&hjb, &net};
  std::uint64_t stream = 11;
  for (const Policy* p : controls) {
    const auto r = is_estimate(*p, cfg, 10000, StreamFamily{stream++, StreamTag::kEstimator, 0});
    CHECK(std::abs(r.mean - plain.mean) < 3 * std::hypot(r.standard_error(), plain.standard_error()));
  }
}
