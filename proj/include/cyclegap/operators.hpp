#ifndef CYCLEGAP_OPERATORS_HPP
#define CYCLEGAP_OPERATORS_HPP

#include <string>
#include <vector>

#include "cyclegap/core.hpp"

namespace cyclegap {

/**
 * Operator algebra on m-tuples of vectors from R^n under the cyclic shift:
 *
 *   R (x_1, ..., x_m) = (x_m, x_1, ..., x_{m-1})   cyclic shift, an isometry
 *   S = R - I                                       block differences
 *   A = (1/m) sum_{i=1..m} R^i                      blockwise average
 *   Q = (1/m) sum_{i=1..m-1} i R^i                  inverts S on zero-mean tuples
 *
 * The zero-mean subspace {x : Ax = 0} is the range of S; on it Q is a
 * two-sided inverse of S and <Qy, y> = -||y||^2 / 2.  All operators are
 * applied by block-index arithmetic, never as materialized matrices, so the
 * power identity R^m = I is exact.
 */
class CycleOperators {
 public:
  CycleOperators(int blocks, int dim) : m_(blocks), n_(dim) {
    if (blocks < 2) {
      throw ConfigError("CycleOperators: needs at least 2 blocks, got " +
                        std::to_string(blocks));
    }
    if (dim < 1) {
      throw ConfigError("CycleOperators: block dimension must be >= 1, got " +
                        std::to_string(dim));
    }
  }

  int blocks() const { return m_; }
  int dim() const { return n_; }

  /// Cyclic shift: block j of the output is block j-1 of the input.
  ProductVec apply_R(const ProductVec& x) const {
    check_shape(x);
    ProductVec out(m_, n_);
    for (int j = 0; j < m_; ++j) {
      auto src = x.block((j + m_ - 1) % m_);
      auto dst = out.block(j);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
  }

  /// Inverse shift R^{m-1}: block j of the output is block j+1 of the input.
  ProductVec apply_R_back(const ProductVec& x) const {
    check_shape(x);
    ProductVec out(m_, n_);
    for (int j = 0; j < m_; ++j) {
      auto src = x.block((j + 1) % m_);
      auto dst = out.block(j);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
  }

  /// S = R - I: (x_m - x_1, x_1 - x_2, ..., x_{m-1} - x_m).  Blocks of the
  /// output sum to zero.
  ProductVec apply_S(const ProductVec& x) const {
    check_shape(x);
    ProductVec out(m_, n_);
    for (int j = 0; j < m_; ++j) {
      auto prev = x.block((j + m_ - 1) % m_);
      auto cur = x.block(j);
      auto dst = out.block(j);
      for (int c = 0; c < n_; ++c) dst[c] = prev[c] - cur[c];
    }
    return out;
  }

  /// A: every output block is the mean of the input blocks.  A is the
  /// orthogonal projection onto constant tuples; idempotent and symmetric.
  ProductVec apply_A(const ProductVec& x) const {
    check_shape(x);
    Vec mean(n_, 0.0);
    for (int j = 0; j < m_; ++j) {
      auto b = x.block(j);
      for (int c = 0; c < n_; ++c) mean[c] += b[c];
    }
    for (int c = 0; c < n_; ++c) mean[c] /= m_;
    ProductVec out(m_, n_);
    for (int j = 0; j < m_; ++j) {
      auto dst = out.block(j);
      std::copy(mean.begin(), mean.end(), dst.begin());
    }
    return out;
  }

  /// Q = (1/m) sum_{i=1..m-1} i R^i, evaluated by the same formula on every
  /// input.  Its inverse relationship with S and the quadratic-form identity
  /// hold only on zero-mean tuples.
  ProductVec apply_Q(const ProductVec& x) const {
    check_shape(x);
    ProductVec out(m_, n_);
    for (int j = 0; j < m_; ++j) {
      auto dst = out.block(j);
      for (int i = 1; i < m_; ++i) {
        auto src = x.block((j + m_ - i) % m_);
        for (int c = 0; c < n_; ++c) dst[c] += i * src[c];
      }
      for (int c = 0; c < n_; ++c) dst[c] /= m_;
    }
    return out;
  }

  /// Orthogonal projection onto the zero-mean subspace: x - Ax.
  ProductVec project_Y(const ProductVec& x) const {
    check_shape(x);
    ProductVec out = x;
    const ProductVec ax = apply_A(x);
    out -= ax;
    return out;
  }

  /// The shift as an (m n) x (m n) permutation matrix over flat coordinates.
  DenseMatrix shift_matrix() const {
    const int d = m_ * n_;
    DenseMatrix mat(d, d);
    for (int j = 0; j < m_; ++j) {
      const int src = (j + m_ - 1) % m_;
      for (int c = 0; c < n_; ++c) {
        mat.at(j * n_ + c, src * n_ + c) = 1.0;
      }
    }
    return mat;
  }

 private:
  void check_shape(const ProductVec& x) const {
    if (x.blocks() != m_ || x.dim() != n_) {
      throw DimensionError("CycleOperators: operand has shape (" +
                           std::to_string(x.blocks()) + "," +
                           std::to_string(x.dim()) + "), expected (" +
                           std::to_string(m_) + "," + std::to_string(n_) + ")");
    }
  }

  int m_;
  int n_;
};

/**
 * Nonexpansiveness diagnostic for an arbitrary square matrix M: with
 * S = M - I, returns ||Sx||^2 + 2<Sx, x>, which equals ||Mx||^2 - ||x||^2
 * identically.  Zero for all x iff M is an isometry; <= 0 for all x iff M is
 * nonexpansive.
 */
inline double isometry_defect(const DenseMatrix& mat, std::span<const double> x) {
  if (mat.rows != mat.cols) {
    throw DimensionError("isometry_defect: matrix must be square");
  }
  if (static_cast<int>(x.size()) != mat.cols) {
    throw DimensionError("isometry_defect: vector length " +
                         std::to_string(x.size()) + " does not match matrix size " +
                         std::to_string(mat.cols));
  }
  const Vec mx = mat.apply(x);
  double s_sq = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = mx[i] - x[i];
    s_sq += s * s;
    cross += s * x[i];
  }
  return s_sq + 2.0 * cross;
}

inline double isometry_defect(const DenseMatrix& mat, const Vec& x) {
  return isometry_defect(mat, std::span<const double>(x));
}

struct IdentityResult {
  std::string name;
  double violation;
};

/**
 * Max violation of each algebraic identity of the cycle operators over
 * seeded random tuples.  All violations are absolute; every identity is
 * exact in real arithmetic, so observed values are pure rounding noise.
 */
inline std::vector<IdentityResult> identity_suite(int m, int n, int trials,
                                                  std::uint64_t seed) {
  if (trials < 1) throw ConfigError("identity_suite: trials must be >= 1");
  const CycleOperators ops(m, n);
  Rng rng(seed);

  auto max_abs_diff = [](const ProductVec& a, const ProductVec& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.flat().size(); ++i) {
      worst = std::max(worst, std::abs(a.flat()[i] - b.flat()[i]));
    }
    return worst;
  };
  auto max_abs = [](const ProductVec& a) {
    double worst = 0.0;
    for (double x : a.flat()) worst = std::max(worst, std::abs(x));
    return worst;
  };

  std::vector<IdentityResult> out = {
      {"shift_order", 0.0},                  // R^m x = x
      {"shift_isometry", 0.0},               // ||Rx|| = ||x||
      {"difference_zero_mean", 0.0},         // A(Sx) = 0
      {"average_shift_invariance", 0.0},     // A R^k x = R^k A x = A x
      {"inverse_on_zero_mean", 0.0},         // S(Qy) = y, Q(Sy) = y for y = P_Y x
      {"difference_antidifference", 0.0},    // SQx = QSx = x - Ax
      {"average_antidifference", 0.0},       // AQx = QAx = (m-1)/2 Ax
      {"average_idempotent", 0.0},           // A(Ax) = Ax, S(Ax) = A(Sx) = 0
      {"difference_energy", 0.0},            // ||Sx||^2 = -2<Sx, x>
      {"antidifference_energy", 0.0},        // <Qy, y> = -||y||^2/2 on zero mean
      {"average_symmetry", 0.0},             // <Ax, z> = <x, Az>
  };

  for (int t = 0; t < trials; ++t) {
    const ProductVec x = rng.normal_product(m, n);
    const ProductVec z = rng.normal_product(m, n);

    ProductVec rm = x;
    double shift_order = 0.0;
    for (int k = 1; k <= m; ++k) {
      rm = ops.apply_R(rm);
      // collect A R^k x vs A x along the way
      const ProductVec ark = ops.apply_A(rm);
      const ProductVec ax = ops.apply_A(x);
      shift_order = std::max(shift_order, max_abs_diff(ark, ax));
    }
    out[0].violation = std::max(out[0].violation, max_abs_diff(rm, x));

    const ProductVec rx = ops.apply_R(x);
    out[1].violation =
        std::max(out[1].violation, std::abs(norm(rx) - norm(x)));

    const ProductVec sx = ops.apply_S(x);
    out[2].violation = std::max(out[2].violation, max_abs(ops.apply_A(sx)));

    const ProductVec ax = ops.apply_A(x);
    const ProductVec arx = ops.apply_A(rx);
    const ProductVec rax = ops.apply_R(ax);
    out[3].violation = std::max({out[3].violation, max_abs_diff(arx, ax),
                                 max_abs_diff(rax, ax), shift_order});

    const ProductVec y = ops.project_Y(x);
    const ProductVec sqy = ops.apply_S(ops.apply_Q(y));
    const ProductVec qsy = ops.apply_Q(ops.apply_S(y));
    out[4].violation = std::max(
        {out[4].violation, max_abs_diff(sqy, y), max_abs_diff(qsy, y)});

    const ProductVec sqx = ops.apply_S(ops.apply_Q(x));
    const ProductVec qsx = ops.apply_Q(ops.apply_S(x));
    ProductVec x_minus_ax = x;
    x_minus_ax -= ax;
    out[5].violation =
        std::max({out[5].violation, max_abs_diff(sqx, x_minus_ax),
                  max_abs_diff(qsx, x_minus_ax)});

    const ProductVec aqx = ops.apply_A(ops.apply_Q(x));
    const ProductVec qax = ops.apply_Q(ax);
    const ProductVec scaled_ax = (0.5 * (m - 1)) * ax;
    out[6].violation =
        std::max({out[6].violation, max_abs_diff(aqx, scaled_ax),
                  max_abs_diff(qax, scaled_ax)});

    const ProductVec aax = ops.apply_A(ax);
    out[7].violation =
        std::max({out[7].violation, max_abs_diff(aax, ax),
                  max_abs(ops.apply_S(ax)), max_abs(ops.apply_A(sx))});

    const double s_sq = inner_product(sx, sx);
    const double s_cross = inner_product(sx, x);
    out[8].violation =
        std::max(out[8].violation, std::abs(s_sq + 2.0 * s_cross));

    const ProductVec qy = ops.apply_Q(y);
    const double qyy = inner_product(qy, y);
    const double ynorm_sq = inner_product(y, y);
    out[9].violation =
        std::max(out[9].violation, std::abs(qyy + 0.5 * ynorm_sq));

    const double axz = inner_product(ax, z);
    const double xaz = inner_product(x, ops.apply_A(z));
    out[10].violation = std::max(out[10].violation, std::abs(axz - xaz));
  }
  return out;
}

}  // namespace cyclegap

#endif  // CYCLEGAP_OPERATORS_HPP
