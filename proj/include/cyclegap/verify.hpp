#ifndef CYCLEGAP_VERIFY_HPP
#define CYCLEGAP_VERIFY_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "cyclegap/core.hpp"
#include "cyclegap/operators.hpp"
#include "cyclegap/sets.hpp"
#include "cyclegap/solver.hpp"

namespace cyclegap {

struct Witness {
  std::string label;
  Vec point;
};

/// One verification entry.  pass holds exactly when violation <= tolerance;
/// sub-results measured against tighter thresholds are rescaled into the
/// entry's tolerance before folding, with raw values kept in details.
struct CheckResult {
  std::string name;
  bool pass = false;
  double violation = 0.0;
  double tolerance = 0.0;
  std::vector<Witness> witnesses;
  std::map<std::string, double> details;
  double wall_ms = 0.0;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool all_pass() const {
    for (const CheckResult& c : checks) {
      if (!c.pass) return false;
    }
    return true;
  }

  const CheckResult* find(const std::string& name) const {
    for (const CheckResult& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
};

struct VerifyOptions {
  int samples = 100;         // per-check sample budget
  double grid_step = 0.05;   // reverse-geometry grid resolution for n <= 2
  std::uint64_t seed = 1;
  double sample_radius = 10.0;

  // Membership bands absorb solver error; identity thresholds are rounding
  // scale; the certificate threshold matches the solvers' agreement scale.
  double tol_cycle = default_tolerances().solver + default_tolerances().feas;
  double tol_equivalence = 1e-5;
  double tol_geometry = default_tolerances().solver + default_tolerances().feas;
  double tol_identity = default_tolerances().identity;
  double tol_saddle_certificate = 1e-6;
  double tol_d_bound = 1e-8;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    const auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline void require_product_shape(const ConvexSet& C, const CycleOperators& ops) {
  if (C.kind() != ConvexSet::Kind::product) {
    throw ConfigError("verifier: the constraint set must be a product of per-block sets");
  }
  const auto& factors = C.factors();
  if (static_cast<int>(factors.size()) != ops.blocks()) {
    throw ConfigError("verifier: product has " + std::to_string(factors.size()) +
                      " factors, expected " + std::to_string(ops.blocks()));
  }
  for (const ConvexSet& f : factors) {
    if (f.dim() != ops.dim()) {
      throw ConfigError("verifier: every factor must live in R^" +
                        std::to_string(ops.dim()));
    }
  }
}

/// Offsets by which each leading set is translated in the intersection
/// identity: set k (0-based, k < m-1) is shifted by the sum of the gap
/// vector's blocks k..m-2.
inline std::vector<Vec> translate_offsets(const ProductVec& v) {
  const int m = v.blocks();
  const int n = v.dim();
  std::vector<Vec> offsets(m - 1, Vec(n, 0.0));
  Vec acc(n, 0.0);
  for (int k = m - 2; k >= 0; --k) {
    auto b = v.block(k);
    for (int c = 0; c < n; ++c) acc[c] += b[c];
    offsets[k] = acc;
  }
  return offsets;
}

}  // namespace detail

struct CycleCheck {
  bool is_cycle = false;
  double residual = 0.0;
};

/**
 * Cycle test in two equivalent forms: the difference form (each block in its
 * set and consecutive differences matching the displacement) and the
 * fixed-point form ||z - P_C(Rz)||.  The two must agree; a gap beyond
 * 10 * tol between them signals a solver or set bug and throws.
 */
inline CycleCheck check_cycle(const CycleOperators& ops, const ConvexSet& C,
                              const ProductVec& z, const ProductVec& d,
                              double tol) {
  detail::require_product_shape(C, ops);
  const int m = ops.blocks();
  const int n = ops.dim();

  double diff_residual = 0.0;
  const auto& factors = C.factors();
  for (int i = 0; i < m; ++i) {
    diff_residual = std::max(diff_residual, factors[i].distance(z.block(i)));
  }
  for (int i = 1; i < m; ++i) {
    auto prev = z.block(i - 1);
    auto cur = z.block(i);
    auto di = d.block(i);
    double acc = 0.0;
    for (int c = 0; c < n; ++c) {
      const double r = prev[c] - cur[c] - di[c];
      acc += r * r;
    }
    diff_residual = std::max(diff_residual, std::sqrt(acc));
  }

  const ProductVec pz = C.project(ops.apply_R(z));
  const double fp_residual = distance(z, pz);

  const bool diff_ok = diff_residual <= tol;
  const bool fp_ok = fp_residual <= tol;
  if ((diff_ok && fp_residual > 10.0 * tol) ||
      (fp_ok && diff_residual > 10.0 * tol)) {
    throw SolverError("check_cycle: difference form (" +
                      std::to_string(diff_residual) + ") and fixed-point form (" +
                      std::to_string(fp_residual) +
                      ") disagree beyond 10x tolerance");
  }

  CycleCheck out;
  out.residual = std::max(diff_residual, fp_residual);
  out.is_cycle = diff_ok && fp_ok;
  return out;
}

/**
 * Three-way equivalence on feasible probes: fixed point of the cycle map,
 * admissible difference (support(Sz) + ||Sz||^2/2 <= 0), and difference
 * equal to the displacement.  The three booleans must classify every probe
 * identically.  The entry's violation is the disagreement margin (how far
 * the tolerance would need to move to reconcile), plus the energy-identity
 * defect <Sz, z> + ||Sz||^2/2 which must vanish identically.
 */
inline CheckResult check_pthm_equivalence(const CycleOperators& ops,
                                          const ConvexSet& C, const ProductVec& d,
                                          const std::vector<ProductVec>& points,
                                          const VerifyOptions& opts = {}) {
  detail::Stopwatch watch;
  CheckResult out;
  out.name = "pthm";
  out.tolerance = opts.tol_identity;
  const double tol = opts.tol_equivalence;

  double worst_margin = 0.0;
  double worst_energy = 0.0;
  int disagreements = 0;
  for (const ProductVec& z : points) {
    const ProductVec pz = C.project(ops.apply_R(z));
    const double r_fixed = distance(z, pz);

    const ProductVec sz = ops.apply_S(z);
    const double sigma = C.support(sz);
    const double sz_sq = inner_product(sz, sz);
    const double r_admissible = sigma + 0.5 * sz_sq;  // may be +inf

    const double r_displacement = distance(sz, d);

    const bool p_fixed = r_fixed <= tol;
    const bool p_admissible = r_admissible <= tol;
    const bool p_displacement = r_displacement <= tol;

    if (sigma < kInf) {
      worst_energy =
          std::max(worst_energy, std::abs(inner_product(sz, z) + 0.5 * sz_sq));
    }

    if (p_fixed != p_admissible || p_fixed != p_displacement) {
      ++disagreements;
      double margin = kInf;
      for (const double r : {r_fixed, r_admissible, r_displacement}) {
        margin = std::min(margin, std::abs(r - tol));
      }
      worst_margin = std::max(worst_margin, margin);
      if (out.witnesses.size() < 5) {
        out.witnesses.push_back({"disagreeing probe", z.flat()});
      }
    }
  }

  out.violation = std::max(worst_margin, worst_energy);
  out.pass = out.violation <= out.tolerance;
  out.details["probes"] = static_cast<double>(points.size());
  out.details["disagreements"] = static_cast<double>(disagreements);
  out.details["energy_identity_violation"] = worst_energy;
  out.details["classification_tolerance"] = tol;
  if (out.pass) out.witnesses.clear();
  out.wall_ms = watch.ms();
  return out;
}

/**
 * Both directions of the intersection identity for last blocks of cycles:
 * forward, every computed cycle's last block lies in the last set and in all
 * translated leading sets; reverse, every candidate from the intersection
 * reconstructs to a tuple that passes the cycle test.  Sampling-based:
 * candidates come from a grid (dimension <= 2) plus seeded samples.
 */
inline CheckResult verify_geometry(const CycleOperators& ops, const ConvexSet& C,
                                   const GapResult& gap,
                                   const std::vector<CycleResult>& cycles,
                                   const VerifyOptions& opts = {}) {
  detail::Stopwatch watch;
  if (!gap.converged) {
    throw ConfigError("verify_geometry: gap solve did not converge");
  }
  detail::require_product_shape(C, ops);
  const int m = ops.blocks();
  const int n = ops.dim();
  const auto& factors = C.factors();
  const std::vector<Vec> offsets = detail::translate_offsets(gap.v);

  // Last set plus each translated leading set; membership in all of them is
  // exactly membership in the intersection identity's right-hand side.
  std::vector<ConvexSet> rhs_sets;
  rhs_sets.push_back(factors[m - 1]);
  for (int k = 0; k < m - 1; ++k) {
    rhs_sets.push_back(ConvexSet::translate(factors[k], offsets[k]));
  }

  CheckResult out;
  out.name = "geometry";
  out.tolerance = opts.tol_geometry;
  double violation = 0.0;

  // Forward direction.
  int forward_checked = 0;
  for (const CycleResult& cr : cycles) {
    if (!cr.converged) continue;
    ++forward_checked;
    const Vec zm = cr.z.block_vec(m - 1);
    for (const ConvexSet& s : rhs_sets) {
      const double dist = s.distance(zm);
      if (dist > violation) {
        violation = dist;
        if (dist > out.tolerance) {
          out.witnesses.push_back({"cycle last block outside intersection", zm});
        }
      }
    }
  }

  // Reverse direction: candidate last blocks.
  std::vector<Vec> candidates =
      factors[m - 1].sample_points(opts.samples, opts.seed ^ 0xA5C3ull,
                                   opts.sample_radius);
  if (n <= 2) {
    Vec lo(n, kInf), hi(n, -kInf);
    for (const Vec& p : candidates) {
      for (int c = 0; c < n; ++c) {
        lo[c] = std::min(lo[c], p[c]);
        hi[c] = std::max(hi[c], p[c]);
      }
    }
    const double step = opts.grid_step;
    for (int c = 0; c < n; ++c) {
      lo[c] = std::floor(lo[c] / step) * step - step;
      hi[c] = std::ceil(hi[c] / step) * step + step;
    }
    std::vector<int> counts(n);
    long total = 1;
    for (int c = 0; c < n; ++c) {
      counts[c] = static_cast<int>(std::round((hi[c] - lo[c]) / step)) + 1;
      total *= counts[c];
    }
    if (total <= 200000) {
      for (long idx = 0; idx < total; ++idx) {
        long rem = idx;
        Vec node(n);
        for (int c = 0; c < n; ++c) {
          node[c] = lo[c] + (rem % counts[c]) * step;
          rem /= counts[c];
        }
        candidates.push_back(std::move(node));
      }
    }
  }

  // Filter well inside the tolerance band so reconstructed tuples cannot
  // fail the cycle test by accumulated boundary slack.
  const double filter_tol = out.tolerance / (2.0 * m);
  int reverse_checked = 0;
  double sw_defect = 0.0;
  for (const Vec& zeta : candidates) {
    bool member = true;
    for (const ConvexSet& s : rhs_sets) {
      if (s.distance(zeta) > filter_tol) {
        member = false;
        break;
      }
    }
    if (!member) continue;
    ++reverse_checked;

    ProductVec w(m, n);
    {
      auto last = w.block(m - 1);
      std::copy(zeta.begin(), zeta.end(), last.begin());
      for (int k = 0; k < m - 1; ++k) {
        auto b = w.block(k);
        for (int c = 0; c < n; ++c) b[c] = zeta[c] - offsets[k][c];
      }
    }

    // The reconstruction satisfies Sw = d by construction; verify before the
    // fixed-point test so an algebra bug is distinguishable from a set bug.
    const ProductVec sw = ops.apply_S(w);
    sw_defect = std::max(sw_defect, distance(sw, gap.d));

    const ProductVec pw = C.project(ops.apply_R(w));
    const double res = distance(w, pw);
    if (res > violation) {
      violation = res;
      if (res > out.tolerance) {
        out.witnesses.push_back({"intersection point with no cycle", zeta});
      }
    }
  }
  violation = std::max(violation, sw_defect);

  out.violation = violation;
  out.pass = out.violation <= out.tolerance;
  out.details["forward_cycles"] = static_cast<double>(forward_checked);
  out.details["reverse_candidates"] = static_cast<double>(candidates.size());
  out.details["reverse_members"] = static_cast<double>(reverse_checked);
  out.details["reconstruction_defect"] = sw_defect;
  if (out.pass) out.witnesses.clear();
  out.wall_ms = watch.ms();
  return out;
}

/**
 * Saddle-value certificate.  With f(b, y) = support(y) + ||y||^2/2
 * + <b, Qy> - support(b): the diagonal f(b, b) cancels to
 * ||b||^2/2 + <b, Qb>, which vanishes identically on zero-mean tuples, and
 * the computed displacement must satisfy sup over admissible b of
 * f(b, d) <= tolerance.  Admissible samples are produced by scaling
 * zero-mean draws until they enter the admissible set; when no sample
 * besides 0 qualifies, the check degenerates to {0, d} and says so.
 */
inline CheckResult saddle_check(const CycleOperators& ops, const ConvexSet& C,
                                const GapResult& gap, const VerifyOptions& opts = {}) {
  detail::Stopwatch watch;
  if (!gap.converged) {
    throw ConfigError("saddle_check: gap solve did not converge");
  }
  CheckResult out;
  out.name = "saddle";
  out.tolerance = opts.tol_saddle_certificate;

  const int m = ops.blocks();
  const int n = ops.dim();
  Rng rng(opts.seed ^ 0x5ADD1Eull);

  // Diagonal identity on raw zero-mean draws, in the cancelled form that
  // never meets the support function.
  double diag_violation = 0.0;
  std::vector<ProductVec> admissible;
  admissible.push_back(ProductVec(m, n));  // b = 0
  admissible.push_back(gap.d);
  for (int i = 0; i < opts.samples; ++i) {
    const ProductVec y = ops.project_Y(rng.normal_product(m, n));
    const double y_sq = inner_product(y, y);
    diag_violation = std::max(
        diag_violation,
        std::abs(0.5 * y_sq + inner_product(y, ops.apply_Q(y))));
    if (y_sq == 0.0) continue;
    const double sigma = C.support(y);
    if (sigma < 0.0) {
      // The ray t*y stays admissible up to t = -2 sigma / ||y||^2; take the
      // boundary point and one interior point.
      const double t_boundary = -2.0 * sigma / y_sq;
      admissible.push_back(t_boundary * y);
      admissible.push_back((0.5 * t_boundary) * y);
    }
  }
  if (admissible.size() == 2) {
    log_info("saddle_check: no admissible samples beyond {0, d}; running degenerate check");
    out.details["degenerate"] = 1.0;
  }

  const ProductVec qd = ops.apply_Q(gap.d);
  const double sigma_d = C.support(gap.d);
  const double base = sigma_d + 0.5 * inner_product(gap.d, gap.d);
  double sup_violation = 0.0;
  for (const ProductVec& b : admissible) {
    const double sigma_b = C.support(b);
    if (sigma_b == kInf) continue;  // f = -inf, vacuous
    const double f = base + inner_product(b, qd) - sigma_b;
    sup_violation = std::max(sup_violation, f);

    // Diagonal identity for the admissible samples too, in cancelled form.
    diag_violation = std::max(
        diag_violation,
        std::abs(0.5 * inner_product(b, b) + inner_product(b, ops.apply_Q(b))));
  }

  // The diagonal defect is held to rounding scale; rescale it into this
  // entry's tolerance so a single threshold governs pass/fail.
  const double diag_scale = out.tolerance / opts.tol_identity;
  out.violation = std::max(sup_violation, diag_violation * diag_scale);
  out.pass = out.violation <= out.tolerance;
  out.details["diagonal_violation"] = diag_violation;
  out.details["certificate_violation"] = sup_violation;
  out.details["admissible_samples"] = static_cast<double>(admissible.size());
  if (!out.pass) {
    out.witnesses.push_back({"displacement with positive saddle value", gap.d.flat()});
  }
  out.wall_ms = watch.ms();
  return out;
}

/// Norm bound: the displacement never exceeds twice the norm of any point of
/// the constraint set.
inline CheckResult d_bound_check(const CycleOperators& ops, const ConvexSet& C,
                                 const GapResult& gap, const VerifyOptions& opts = {}) {
  detail::Stopwatch watch;
  if (!gap.converged) {
    throw ConfigError("d_bound_check: gap solve did not converge");
  }
  (void)ops;
  CheckResult out;
  out.name = "dbound";
  out.tolerance = opts.tol_d_bound;

  const double d_norm = norm(gap.d);
  const std::vector<Vec> samples =
      C.sample_points(opts.samples, opts.seed ^ 0xD0B0ull, opts.sample_radius);
  double violation = 0.0;
  for (const Vec& c0 : samples) {
    const double excess = d_norm - 2.0 * norm(std::span<const double>(c0));
    if (excess > violation) {
      violation = excess;
      if (excess > out.tolerance && out.witnesses.size() < 5) {
        out.witnesses.push_back({"set point violating the norm bound", c0});
      }
    }
  }
  out.violation = violation;
  out.pass = out.violation <= out.tolerance;
  out.details["samples"] = static_cast<double>(samples.size());
  out.details["d_norm"] = d_norm;
  if (out.pass) out.witnesses.clear();
  out.wall_ms = watch.ms();
  return out;
}

/**
 * Probe tuples for the equivalence check, all blockwise feasible: converged
 * cycles, cycles perturbed at three magnitudes and re-projected, and generic
 * projected draws.
 */
inline std::vector<ProductVec> make_equivalence_probes(
    const CycleOperators& ops, const ConvexSet& C,
    const std::vector<CycleResult>& cycles, int count, std::uint64_t seed) {
  const int m = ops.blocks();
  const int n = ops.dim();
  Rng rng(seed ^ 0x9B0BE5ull);
  std::vector<ProductVec> probes;
  std::vector<ProductVec> converged;
  for (const CycleResult& cr : cycles) {
    if (cr.converged) converged.push_back(cr.z);
  }
  probes.insert(probes.end(), converged.begin(), converged.end());

  const double deltas[] = {1e-2, 1e-1, 1.0};
  int k = 0;
  while (static_cast<int>(probes.size()) < count) {
    ProductVec g = rng.normal_product(m, n);
    if (!converged.empty() && k % 2 == 0) {
      const ProductVec& z = converged[(k / 2) % converged.size()];
      const double delta = deltas[(k / 2) % 3];
      g *= delta;
      g += z;
    } else {
      g *= 3.0;
    }
    probes.push_back(C.project(g));
    ++k;
  }
  return probes;
}

/// The cycle entry: every converged cycle must pass both cycle forms, step
/// along the gap vector blockwise, and the gap vector's blocks must sum to
/// zero (rescaled from rounding tolerance into this entry's band).
inline CheckResult check_cycles_entry(const CycleOperators& ops, const ConvexSet& C,
                                      const std::vector<CycleResult>& cycles,
                                      const GapResult& gap,
                                      const VerifyOptions& opts = {}) {
  detail::Stopwatch watch;
  CheckResult out;
  out.name = "cycle";
  out.tolerance = opts.tol_cycle;

  const int m = ops.blocks();
  const int n = ops.dim();
  double violation = 0.0;
  int checked = 0;
  for (const CycleResult& cr : cycles) {
    if (!cr.converged) continue;
    ++checked;
    const CycleCheck cc = check_cycle(ops, C, cr.z, gap.d, opts.tol_cycle);
    if (cc.residual > violation) {
      violation = cc.residual;
      if (!cc.is_cycle) {
        out.witnesses.push_back({"claimed cycle failing the cycle test", cr.z.flat()});
      }
    }
    // Step form: the next block is the previous one plus the gap vector block.
    for (int i = 0; i + 1 < m; ++i) {
      auto cur = cr.z.block(i);
      auto nxt = cr.z.block(i + 1);
      auto vi = gap.v.block(i);
      double acc = 0.0;
      for (int c = 0; c < n; ++c) {
        const double r = nxt[c] - cur[c] - vi[c];
        acc += r * r;
      }
      violation = std::max(violation, std::sqrt(acc));
    }
  }

  // Blocks of the gap vector sum to zero at rounding scale.
  Vec vsum(n, 0.0);
  for (int i = 0; i < m; ++i) {
    auto b = gap.v.block(i);
    for (int c = 0; c < n; ++c) vsum[c] += b[c];
  }
  const double vsum_norm = norm(std::span<const double>(vsum));
  const double scale = opts.tol_cycle / opts.tol_identity;
  violation = std::max(violation, vsum_norm * scale);

  out.violation = violation;
  out.pass = out.violation <= out.tolerance;
  out.details["cycles_checked"] = static_cast<double>(checked);
  out.details["gap_vector_sum"] = vsum_norm;
  if (out.pass) out.witnesses.clear();
  out.wall_ms = watch.ms();
  return out;
}

}  // namespace cyclegap

#endif  // CYCLEGAP_VERIFY_HPP
