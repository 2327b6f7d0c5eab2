#include "stdd/linear_solve.hpp"

#include <cmath>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "stdd/errors.hpp"

namespace stdd {

void LinearOptions::validate() const {
  if (!(cg_tol > 0.0)) throw ConfigError("cg_tol must be > 0");
  if (cg_max_iters < 0) throw ConfigError("cg_max_iters must be >= 0");
}

std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                      std::vector<double> upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw ContractError("solve_tridiagonal: band sizes differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double m = lower[i] / diag[i - 1];
      diag[i] -= m * upper[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    if (!(std::abs(diag[i]) > 0.0) || !std::isfinite(diag[i])) {
      throw SolverError("tridiagonal solve hit a zero pivot at row " + std::to_string(i),
                        std::abs(rhs[i]));
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    const double next = i + 1 < n ? upper[i] * x[i + 1] : 0.0;
    x[i] = (rhs[i] - next) / diag[i];
  }
  return x;
}

std::vector<double> solve_linear(const MatrixEntries& K, std::span<const double> d,
                                 std::span<const double> rhs, int dim, const LinearOptions& opts) {
  const std::size_t n = K.n;
  if (d.size() != n || rhs.size() != n) throw ContractError("solve_linear: size mismatch");
  LinearSolverKind kind = opts.solver;
  if (kind == LinearSolverKind::automatic) {
    kind = dim == 1 ? LinearSolverKind::tridiagonal : LinearSolverKind::conjugate_gradient;
  }

  if (kind == LinearSolverKind::tridiagonal) {
    if (dim != 1) throw ConfigError("the tridiagonal solver is only available on 1D meshes");
    std::vector<double> lo(n, 0.0);
    std::vector<double> di(d.begin(), d.end());
    std::vector<double> up(n, 0.0);
    for (std::size_t j = 0; j < K.values.size(); ++j) {
      const int r = K.rows[j];
      const int c = K.cols[j];
      if (c == r) {
        di[static_cast<std::size_t>(r)] += K.values[j];
      } else if (c == r + 1) {
        up[static_cast<std::size_t>(r)] += K.values[j];
      } else if (c == r - 1) {
        lo[static_cast<std::size_t>(r)] += K.values[j];
      } else {
        throw ContractError("solve_linear: matrix is not tridiagonal");
      }
    }
    return solve_tridiagonal(std::move(lo), std::move(di), std::move(up),
                             std::vector<double>(rhs.begin(), rhs.end()));
  }

  using SpMat = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(K.values.size() + n);
  for (std::size_t j = 0; j < K.values.size(); ++j) trip.emplace_back(K.rows[j], K.cols[j], K.values[j]);
  for (std::size_t i = 0; i < n; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), d[i]);
  SpMat A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(trip.begin(), trip.end());

  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n));
  if (b.norm() == 0.0) return std::vector<double>(n, 0.0);
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(opts.cg_tol);
  cg.setMaxIterations(opts.cg_max_iters > 0 ? opts.cg_max_iters : static_cast<int>(10 * n));
  cg.compute(A);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError("conjugate gradient did not converge (relative residual " +
                          std::to_string(cg.error()) + ")",
                      cg.error() * b.norm());
  }
  return {x.data(), x.data() + n};
}

}  // namespace stdd
