#ifndef CYCLEGAP_LINALG_HPP
#define CYCLEGAP_LINALG_HPP

#include <Eigen/Dense>
#include <sstream>
#include <utility>

#include "cyclegap/core.hpp"

namespace cyclegap {

/**
 * LU factorization of a square matrix, reusable across right-hand sides.
 * Refuses matrices whose estimated condition number exceeds the configured
 * bound, so downstream resolvents fail loudly instead of returning noise.
 */
class LuSolver {
 public:
  explicit LuSolver(const DenseMatrix& m,
                    double max_condition = default_tolerances().max_condition) {
    if (m.rows != m.cols) {
      throw DimensionError("LuSolver: matrix must be square, got " +
                           std::to_string(m.rows) + "x" + std::to_string(m.cols));
    }
    dim_ = m.rows;
    Eigen::MatrixXd a = Eigen::Map<const Eigen::Matrix<
        double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        m.data.data(), m.rows, m.cols);
    lu_.compute(a);
    const double rcond = lu_.rcond();
    condition_ = (rcond > 0.0) ? 1.0 / rcond : kInf;
    if (!(condition_ <= max_condition)) {
      std::ostringstream os;
      os << "LuSolver: matrix is singular or ill-conditioned "
         << "(condition estimate " << condition_ << ", limit " << max_condition
         << ")";
      throw SolverError(os.str());
    }
  }

  Vec solve(std::span<const double> b) const {
    if (static_cast<int>(b.size()) != dim_) {
      throw DimensionError("LuSolver::solve: expected length " +
                           std::to_string(dim_));
    }
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), dim_);
    Eigen::VectorXd x = lu_.solve(rhs);
    return Vec(x.data(), x.data() + dim_);
  }

  /// Estimated condition number of the factored matrix.
  double condition() const { return condition_; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double condition_ = 0.0;
  int dim_ = 0;
};

/// One-shot solve of M x = b.  Deterministic; throws SolverError naming the
/// condition estimate when M is numerically singular.
inline Vec solve_dense(const DenseMatrix& m, const Vec& b) {
  LuSolver lu(m);
  return lu.solve(b);
}

}  // namespace cyclegap

#endif  // CYCLEGAP_LINALG_HPP
