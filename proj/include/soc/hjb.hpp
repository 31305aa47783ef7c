#pragma once

#include <Eigen/Dense>

#include "soc/env.hpp"
#include "soc/policy.hpp"
#include "soc/tridiagonal.hpp"

namespace soc {

// Uniform grid lb + i h, i = 0..n-1.
struct Grid {
  double lb = -2.0;
  double ub = 2.0;
  Eigen::Index n = 4001;

  double h() const { return (ub - lb) / static_cast<double>(n - 1); }
  double node(Eigen::Index i) const { return lb + static_cast<double>(i) * h(); }
  Eigen::ArrayXd nodes() const;
  void validate() const;
};

struct HjbSolution {
  Grid grid;
  Eigen::VectorXd psi;    // Psi = E[exp(-g(X_T) - int f dt)] at the nodes
  Eigen::VectorXd phi;    // value function -log Psi
  Eigen::VectorXd u_opt;  // optimal control sigma (log Psi)'
  double residual = 0.0;  // max row-normalized residual of the discrete system
};

// Finite-difference solution of the Feynman-Kac boundary value problem
//   beta^{-1} Psi'' - V' Psi' - f Psi = 0  left of the target set,
//   Psi = exp(-g)                           on the target set,
//   Psi'(lb) = 0                            (one-sided second-order stencil),
// solved as a single tridiagonal system. The value function and the optimal
// control follow by the log transform.
//
// Throws SolverError for a singular system or a non-positive Psi.
HjbSolution solve_bvp(const EnvConfig& config, const Grid& grid);

// sigma * d/ds log Psi by central differences, second-order one-sided at the edges.
Eigen::VectorXd optimal_control(const Grid& grid, const Eigen::VectorXd& psi, double sigma);

// Linear interpolation of nodal controls; constant extension outside [lb, ub].
class HjbPolicy final : public Policy {
 public:
  HjbPolicy(Grid grid, Eigen::VectorXd u_opt);

  void act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const override;
  double at(double s) const;
  const Grid& grid() const { return grid_; }

 private:
  Grid grid_;
  Eigen::VectorXd u_;
};

HjbPolicy policy_from_solution(const HjbSolution& solution);

}  // namespace soc
