#include "soc/policy.hpp"

#include <stdexcept>

namespace soc {

double Policy::operator()(double s) const {
  Eigen::ArrayXd state(1);
  Eigen::ArrayXd action(1);
  state(0) = s;
  act(state, action);
  return action(0);
}

Eigen::ArrayXd Policy::operator()(const Eigen::ArrayXd& states) const {
  Eigen::ArrayXd actions(states.size());
  act(states, actions);
  return actions;
}

void ZeroPolicy::act(const Eigen::Ref<const Eigen::ArrayXd>&, Eigen::Ref<Eigen::ArrayXd> actions) const {
  actions.setZero();
}

void FunctionPolicy::act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const {
  for (Eigen::Index i = 0; i < states.size(); ++i) actions(i) = fn_(states(i));
}

NetworkPolicy::NetworkPolicy(Mlp<double> net, double low, double high)
    : net_(std::move(net)), low_(low), high_(high) {
  if (net_.spec().input_dim() != 1 || net_.spec().output_dim() != 1)
    throw std::invalid_argument("NetworkPolicy: network must map R -> R");
  if (!(low_ < high_)) throw std::invalid_argument("NetworkPolicy: empty action interval");
}

void NetworkPolicy::act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const {
  const Eigen::MatrixXd out = net_.forward(states.matrix().transpose());
  actions = out.row(0).transpose().array().cwiseMax(low_).cwiseMin(high_);
}

}  // namespace soc
