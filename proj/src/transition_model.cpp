#include "soc/transition_model.hpp"

#include <cmath>
#include <numbers>

namespace soc {

namespace {

double drift_residual(double s_next, double s, double a, const EnvConfig& config) {
  return (s_next - s) / config.dt + grad_potential(s, config.alpha) - sigma(config) * a;
}

}  // namespace

double transition_log_density(double s_next, double s, double a, const EnvConfig& config) {
  const double r = drift_residual(s_next, s, a, config);
  return 0.5 * std::log(config.beta / (4.0 * std::numbers::pi * config.dt)) - 0.25 * config.beta * config.dt * r * r;
}

double grad_action_log_density(double s_next, double s, double a, const EnvConfig& config) {
  return 0.5 * config.beta * config.dt * sigma(config) * drift_residual(s_next, s, a, config);
}

}  // namespace soc
