#include "soc/hjb.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace soc {

Eigen::ArrayXd Grid::nodes() const {
  Eigen::ArrayXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = node(i);
  return x;
}

void Grid::validate() const {
  if (n < 3) throw std::invalid_argument("Grid: need at least 3 nodes");
  if (!(ub > lb)) throw std::invalid_argument("Grid: ub must exceed lb");
}

HjbSolution solve_bvp(const EnvConfig& config, const Grid& grid) {
  config.validate();
  grid.validate();
  const double h = grid.h();
  const double boundary_value = std::exp(-config.g_const);

  // Unknowns are the nodes strictly left of the target set.
  Eigen::Index m = 0;
  while (m < grid.n && !is_terminal(grid.node(m), config)) ++m;
  if (m == grid.n) throw std::invalid_argument("solve_bvp: target set does not intersect the grid");
  if (m < 3) throw std::invalid_argument("solve_bvp: fewer than 3 nodes left of the target set");

  const double diffusion = 1.0 / (config.beta * h * h);
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd upper = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 1; i < m; ++i) {
    const double advection = grad_potential(grid.node(i), config.alpha) / (2.0 * h);
    lower(i) = diffusion + advection;
    diag(i) = -2.0 * diffusion - config.f_const;
    upper(i) = diffusion - advection;
  }
  rhs(m - 1) = -upper(m - 1) * boundary_value;

  // Neumann row -3 Psi_0 + 4 Psi_1 - Psi_2 = 0, with Psi_2 eliminated through row 1.
  diag(0) = -3.0 + lower(1) / upper(1);
  upper(0) = 4.0 + diag(1) / upper(1);
  rhs(0) = rhs(1) / upper(1);
  if (!std::isfinite(diag(0)) || !std::isfinite(upper(0)))
    throw SolverError("solve_bvp: degenerate grid, cannot eliminate the Neumann stencil");

  const Eigen::VectorXd interior = solve_tridiagonal<double>(lower, diag, upper, rhs);

  HjbSolution sol;
  sol.grid = grid;
  sol.psi = Eigen::VectorXd::Constant(grid.n, boundary_value);
  sol.psi.head(m) = interior;
  if (!(sol.psi.array() > 0.0).all() || !sol.psi.allFinite())
    throw SolverError("solve_bvp: non-positive Psi, grid too coarse");

  // Residual of the undeformed system, normalised by the row norms.
  const auto& psi = sol.psi;
  double res = std::abs(-3.0 * psi(0) + 4.0 * psi(1) - psi(2)) / 8.0;
  for (Eigen::Index i = 1; i < m; ++i) {
    const double r = lower(i) * psi(i - 1) + diag(i) * psi(i) + upper(i) * psi(i + 1);
    res = std::max(res, std::abs(r) / (std::abs(lower(i)) + std::abs(diag(i)) + std::abs(upper(i))));
  }
  sol.residual = res;

  sol.phi = -sol.psi.array().log();
  sol.u_opt = optimal_control(grid, sol.psi, sigma(config));
  return sol;
}

Eigen::VectorXd optimal_control(const Grid& grid, const Eigen::VectorXd& psi, double sigma) {
  const Eigen::Index n = grid.n;
  if (psi.size() != n) throw std::invalid_argument("optimal_control: psi size differs from grid");
  const Eigen::VectorXd lg = psi.array().log();
  const double h = grid.h();
  Eigen::VectorXd d(n);
  d(0) = (-3.0 * lg(0) + 4.0 * lg(1) - lg(2)) / (2.0 * h);
  for (Eigen::Index i = 1; i + 1 < n; ++i) d(i) = (lg(i + 1) - lg(i - 1)) / (2.0 * h);
  d(n - 1) = (3.0 * lg(n - 1) - 4.0 * lg(n - 2) + lg(n - 3)) / (2.0 * h);
  return sigma * d;
}

HjbPolicy::HjbPolicy(Grid grid, Eigen::VectorXd u_opt) : grid_(grid), u_(std::move(u_opt)) {
  grid_.validate();
  if (u_.size() != grid_.n) throw std::invalid_argument("HjbPolicy: control size differs from grid");
}

double HjbPolicy::at(double s) const {
  if (s <= grid_.lb) return u_(0);
  if (s >= grid_.ub) return u_(grid_.n - 1);
  const double pos = (s - grid_.lb) / grid_.h();
  const double nearest = std::nearbyint(pos);
  if (std::abs(pos - nearest) < 1e-9) return u_(static_cast<Eigen::Index>(nearest));
  const auto i = std::min(static_cast<Eigen::Index>(pos), grid_.n - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * u_(i) + t * u_(i + 1);
}

void HjbPolicy::act(const Eigen::Ref<const Eigen::ArrayXd>& states, Eigen::Ref<Eigen::ArrayXd> actions) const {
  for (Eigen::Index i = 0; i < states.size(); ++i) actions(i) = at(states(i));
}

HjbPolicy policy_from_solution(const HjbSolution& solution) { return HjbPolicy(solution.grid, solution.u_opt); }

}  // namespace soc
