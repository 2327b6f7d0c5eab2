#ifndef STDD_LINEAR_SOLVE_HPP
#define STDD_LINEAR_SOLVE_HPP

#include <span>
#include <vector>

#include "stdd/operators.hpp"

namespace stdd {

enum class LinearSolverKind { automatic, tridiagonal, conjugate_gradient };

struct LinearOptions {
  /// automatic: tridiagonal in 1D, conjugate gradient otherwise.
  LinearSolverKind solver = LinearSolverKind::automatic;
  double cg_tol = 1e-13;
  int cg_max_iters = 0;  // 0 means 10 * n

  void validate() const;
};

/// Solves (diag(d) + K) x = rhs where K is given by summed entries.
/// Throws SolverError on a zero pivot or when CG does not reach cg_tol.
std::vector<double> solve_linear(const MatrixEntries& K, std::span<const double> d,
                                 std::span<const double> rhs, int dim, const LinearOptions& opts);

/// Thomas algorithm; lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs);

}  // namespace stdd

#endif  // STDD_LINEAR_SOLVE_HPP
