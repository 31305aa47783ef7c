#pragma once

#include <functional>
#include <limits>
#include <memory>

#include <Eigen/Dense>

#include "soc/neural.hpp"

namespace soc {

// Deterministic state -> action map, queried in batches by the rollout engine.
class Policy {
 public:
  virtual ~Policy() = default;

  // actions(i) = mu(states(i)); both arrays have the same length.
  virtual void act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const = 0;

  double operator()(double s) const;
  Eigen::ArrayXd operator()(const Eigen::ArrayXd& states) const;
};

class ZeroPolicy final : public Policy {
 public:
  void act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const override;
};

class FunctionPolicy final : public Policy {
 public:
  explicit FunctionPolicy(std::function<double(double)> fn) : fn_(std::move(fn)) {}
  void act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const override;

 private:
  std::function<double(double)> fn_;
};

// Immutable snapshot of a 1 -> 1 network, optionally clipped to [low, high].
class NetworkPolicy final : public Policy {
 public:
  explicit NetworkPolicy(Mlp<double> net, double low = -std::numeric_limits<double>::infinity(),
                         double high = std::numeric_limits<double>::infinity());

  void act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const override;
  const Mlp<double>& network() const { return net_; }

 private:
  Mlp<double> net_;
  double low_;
  double high_;
};

}  // namespace soc
