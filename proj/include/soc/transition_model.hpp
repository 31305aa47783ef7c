#pragma once

#include "soc/env.hpp"

namespace soc {

// log p(s_next | s, a) of the Euler-Maruyama transition, a Gaussian with mean
// s + (-V'(s) + sigma a) dt and variance sigma^2 dt.
double transition_log_density(double s_next, double s, double a, const EnvConfig& config);

// d/da log p(s_next | s, a). Equals sqrt(dt) * eta when s_next was produced by
// env_step with noise eta.
double grad_action_log_density(double s_next, double s, double a, const EnvConfig& config);

}  // namespace soc
