#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace soc {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thomas elimination for lower(i) x(i-1) + diag(i) x(i) + upper(i) x(i+1) = rhs(i).
// lower(0) and upper(n-1) are ignored. No pivoting: throws SolverError when a
// pivot vanishes or turns non-finite.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_tridiagonal(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& lower,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& diag,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& upper,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& rhs) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n)
    throw std::invalid_argument("solve_tridiagonal: inconsistent sizes");

  Vector c(n);
  Vector d(n);
  Scalar pivot = diag(0);
  for (Eigen::Index i = 0;; ++i) {
    if (pivot == Scalar(0) || !std::isfinite(pivot))
      throw SolverError("solve_tridiagonal: singular pivot at row " + std::to_string(i));
    c(i) = i + 1 < n ? upper(i) / pivot : Scalar(0);
    d(i) = (rhs(i) - (i > 0 ? lower(i) * d(i - 1) : Scalar(0))) / pivot;
    if (i + 1 == n) break;
    pivot = diag(i + 1) - lower(i + 1) * c(i);
  }
  Vector x(n);
  x(n - 1) = d(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
  return x;
}

}  // namespace soc
