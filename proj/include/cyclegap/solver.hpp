#ifndef CYCLEGAP_SOLVER_HPP
#define CYCLEGAP_SOLVER_HPP

#include <optional>
#include <vector>

#include "cyclegap/core.hpp"
#include "cyclegap/linalg.hpp"
#include "cyclegap/operators.hpp"
#include "cyclegap/sets.hpp"

namespace cyclegap {

struct SolverOptions {
  double alpha = 0.5;       // relaxation of the averaged fixed-point iteration
  double lambda = 1.0;      // splitting step size
  int max_iters = 100000;
  double eps_solver = 1e-8;
};

/// Outcome of the cycle search.  z is a tuple with block i in set i.
struct CycleResult {
  ProductVec z{2, 1};
  double fixed_point_residual = 0.0;  // ||z - P_C(Rz)||
  int iterations = 0;
  bool converged = false;
};

/**
 * Outcome of the displacement computation.  d is the unique zero-mean tuple
 * with support(d) + ||d||^2/2 <= 0 that every cycle's difference S z equals;
 * e is its antidifference certificate (S e = d) and v the per-set translation
 * offsets (v = -R^{m-1} d, so d = -R v exactly).
 */
struct GapResult {
  ProductVec d{2, 1};
  ProductVec e{2, 1};
  ProductVec v{2, 1};
  double y_residual = 0.0;  // ||A d||, distance from the zero-mean subspace
  double D_residual = 0.0;  // max(0, support(d) + ||d||^2/2)
  int iterations = 0;
  bool converged = false;
};

/// Resolvent of the scaled support function: x - lambda * P_C(x / lambda).
/// The Moreau decomposition x = prox(x) + lambda * P_C(x / lambda) holds by
/// construction; it reduces every backward step on sigma_C to a projection.
inline ProductVec support_prox(const ConvexSet& C, const ProductVec& x,
                               double lambda) {
  if (!(lambda > 0.0)) throw ConfigError("support_prox: lambda must be > 0");
  ProductVec scaled = (1.0 / lambda) * x;
  const ProductVec proj = C.project(scaled);
  ProductVec out = x;
  out -= lambda * proj;
  return out;
}

/**
 * Averaged fixed-point iteration x <- (1-alpha) x + alpha P_C(R x) on the
 * nonexpansive cycle map.  Stops once the fixed-point residual of the current
 * iterate is within eps_solver (the successive-iterate distance is then
 * alpha times smaller).  The returned z is P_C(R x), so its blocks lie in
 * their sets exactly, and its own residual never exceeds the stopping value.
 */
inline CycleResult km_fixed_point(const CycleOperators& ops, const ConvexSet& C,
                                  const ProductVec& x0,
                                  const SolverOptions& opts = {}) {
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) {
    throw ConfigError("km_fixed_point: alpha must lie in (0, 1)");
  }
  if (opts.max_iters < 1) throw ConfigError("km_fixed_point: max_iters must be >= 1");
  if (C.dim() != ops.blocks() * ops.dim()) {
    throw DimensionError("km_fixed_point: set dimension " +
                         std::to_string(C.dim()) + " does not match tuple size " +
                         std::to_string(ops.blocks() * ops.dim()));
  }

  // Drive the residual well below the reporting tolerance: downstream
  // support-cone tests need the cycle's difference to sit on its cone to
  // much better than the cone band.  Stop early if the residual has hit its
  // rounding floor while already inside the reporting tolerance.
  const double inner_tol = std::max(opts.eps_solver * 1e-4, 1e-13);
  ProductVec x = x0;
  ProductVec tx = C.project(ops.apply_R(x));
  double res = distance(x, tx);
  double prev_res = kInf;
  int iters = 0;
  while (res > inner_tol && iters < opts.max_iters) {
    if (res <= opts.eps_solver && res > 0.999 * prev_res) break;
    prev_res = res;
    x *= 1.0 - opts.alpha;
    x += opts.alpha * tx;
    tx = C.project(ops.apply_R(x));
    res = distance(x, tx);
    ++iters;
  }

  CycleResult out;
  out.z = tx;
  out.iterations = iters;
  out.converged = res <= opts.eps_solver;
  const ProductVec tz = C.project(ops.apply_R(out.z));
  out.fixed_point_residual = distance(out.z, tz);
  log_debug("km_fixed_point: iters=" + std::to_string(iters) +
            " residual=" + std::to_string(out.fixed_point_residual));
  return out;
}

/// v = -R^{m-1} d.  Blocks of v sum to minus the sum of d's blocks, and
/// d = -R v holds exactly by index arithmetic.
inline ProductVec gap_vector(const CycleOperators& ops, const ProductVec& d) {
  ProductVec v = ops.apply_R_back(d);
  v *= -1.0;
  return v;
}

namespace detail {

/// Dense matrix of I + lambda * M with M = P_Y (-Q) P_Y over flat
/// coordinates.  M vanishes on constant tuples and acts as a strongly
/// monotone (half-identity plus skew) map on the zero-mean subspace, so the
/// system is uniformly well conditioned.
inline DenseMatrix resolvent_matrix(const CycleOperators& ops, double lambda) {
  const int m = ops.blocks();
  const int n = ops.dim();
  const int d = m * n;
  DenseMatrix mat(d, d);
  for (int col = 0; col < d; ++col) {
    ProductVec basis(m, n);
    basis.flat()[col] = 1.0;
    ProductVec my = ops.project_Y(ops.apply_Q(ops.project_Y(basis)));
    for (int row = 0; row < d; ++row) {
      mat.at(row, col) = (row == col ? 1.0 : 0.0) - lambda * my.flat()[row];
    }
  }
  return mat;
}

}  // namespace detail

/**
 * Douglas-Rachford splitting for the displacement: finds the zero of
 * (subdifferential of sigma_C) + (normal cone of the zero-mean subspace
 * + M) with M = P_Y (-Q) P_Y.  Both resolvents are exact: the support
 * function's via the Moreau identity, the linear part's via one dense
 * factorization of I + lambda M composed with the zero-mean projection.
 * Strong monotonicity of M on the subspace makes the zero unique, so any
 * starting point reaches the same d.
 *
 * Non-convergence is reported through the converged flag, not thrown; an
 * ill-conditioned resolvent system throws.
 */
inline GapResult dr_gap_solve(const CycleOperators& ops, const ConvexSet& C,
                              const SolverOptions& opts = {},
                              const std::optional<ProductVec>& start = std::nullopt) {
  if (!(opts.lambda > 0.0)) throw ConfigError("dr_gap_solve: lambda must be > 0");
  if (opts.max_iters < 1) throw ConfigError("dr_gap_solve: max_iters must be >= 1");
  const int m = ops.blocks();
  const int n = ops.dim();
  if (C.dim() != m * n) {
    throw DimensionError("dr_gap_solve: set dimension " + std::to_string(C.dim()) +
                         " does not match tuple size " + std::to_string(m * n));
  }

  const LuSolver lin(detail::resolvent_matrix(ops, opts.lambda));
  auto linear_resolvent = [&](const ProductVec& s) {
    const ProductVec rhs = ops.project_Y(s);
    Vec sol = lin.solve(rhs.flat());
    // Re-project to scrub the rounding component off the subspace.
    return ops.project_Y(ProductVec::from_flat(m, n, std::move(sol)));
  };

  // Iterate to well below the reporting tolerance so downstream cone tests
  // and hand-checked digits have headroom; the floor guards against asking
  // for less than rounding allows.
  const double inner_tol = std::max(opts.eps_solver * 1e-4, 1e-13);

  ProductVec s = start.value_or(ProductVec(m, n));
  if (s.blocks() != m || s.dim() != n) {
    throw DimensionError("dr_gap_solve: start tuple has wrong shape");
  }

  ProductVec x(m, n);
  double step = kInf;
  int iters = 0;
  for (; iters < opts.max_iters; ++iters) {
    x = linear_resolvent(s);
    ProductVec reflected = 2.0 * x;
    reflected -= s;
    const ProductVec u = support_prox(C, reflected, opts.lambda);
    ProductVec delta = u;
    delta -= x;
    step = norm(delta);
    s += delta;
    if (step <= inner_tol) {
      ++iters;
      break;
    }
  }

  GapResult out;
  out.d = linear_resolvent(s);
  out.e = ops.apply_Q(out.d);
  out.v = gap_vector(ops, out.d);
  out.iterations = iters;
  out.y_residual = norm(ops.apply_A(out.d));
  const double sigma = C.support(out.d);
  const double value = sigma + 0.5 * inner_product(out.d, out.d);
  out.D_residual = std::max(0.0, value);
  out.converged = step <= opts.eps_solver && out.y_residual <= opts.eps_solver &&
                  out.D_residual <= opts.eps_solver;
  log_debug("dr_gap_solve: iters=" + std::to_string(iters) +
            " step=" + std::to_string(step) +
            " y_residual=" + std::to_string(out.y_residual) +
            " D_residual=" + std::to_string(out.D_residual));
  return out;
}

/// Membership report for the admissible-displacement set
/// {y zero-mean : support(y) + ||y||^2/2 <= 0}.
struct MembershipReport {
  double sigma = 0.0;  // support value at y, +inf when unbounded
  double value = 0.0;  // sigma + ||y||^2 / 2
  bool in_D = false;
};

inline MembershipReport membership_D(const CycleOperators& ops, const ConvexSet& C,
                                     const ProductVec& y,
                                     const Tolerances& tol = default_tolerances()) {
  MembershipReport rep;
  rep.sigma = C.support(y);
  rep.value = rep.sigma + 0.5 * inner_product(y, y);
  const double mean_norm = norm(ops.apply_A(y));
  rep.in_D = mean_norm <= tol.feas && rep.value <= tol.feas;
  return rep;
}

/**
 * Max over probes x of  support(Se) + <Sx - Se, e> - support(Sx),
 * the subgradient inequality certifying e as a maximizer certificate for the
 * displacement d = Se.  Probes whose difference has unbounded support are
 * skipped; the inequality is vacuous there.  A certified pair stays within
 * solver tolerance of zero.
 */
inline double saddle_residual(const CycleOperators& ops, const ConvexSet& C,
                              const ProductVec& d, const ProductVec& e,
                              const std::vector<ProductVec>& probes,
                              const SolverOptions& opts = {}) {
  const ProductVec se = ops.apply_S(e);
  if (distance(se, d) > opts.eps_solver) {
    throw ConfigError("saddle_residual: e is not a certificate for d (||Se - d|| = " +
                      std::to_string(distance(se, d)) + ")");
  }
  const double sigma_se = C.support(se);
  if (sigma_se == kInf) return kInf;
  double worst = -kInf;
  for (const ProductVec& probe : probes) {
    const ProductVec sx = ops.apply_S(probe);
    const double sigma_sx = C.support(sx);
    if (sigma_sx == kInf) continue;
    ProductVec diff = sx;
    diff -= se;
    const double val = sigma_se + inner_product(diff, e) - sigma_sx;
    worst = std::max(worst, val);
  }
  return worst == -kInf ? 0.0 : worst;
}

}  // namespace cyclegap

#endif  // CYCLEGAP_SOLVER_HPP
