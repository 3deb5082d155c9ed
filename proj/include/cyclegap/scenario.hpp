#ifndef CYCLEGAP_SCENARIO_HPP
#define CYCLEGAP_SCENARIO_HPP

#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cyclegap/core.hpp"
#include "cyclegap/operators.hpp"
#include "cyclegap/sets.hpp"
#include "cyclegap/solver.hpp"
#include "cyclegap/verify.hpp"

namespace cyclegap {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// A fully resolved problem instance: m sets over R^n plus solver and
/// verification settings and the fixed-point starting tuples.
struct Scenario {
  std::string name;
  int m = 2;
  int n = 1;
  std::vector<ConvexSet> sets;
  std::vector<Json> set_descriptors;  // retained verbatim for serialization
  SolverOptions solver;
  VerifyOptions verify;
  std::vector<ProductVec> starts;

  ConvexSet product() const { return ConvexSet::product(sets); }
};

namespace detail {

inline const Json& require_field(const Json& j, const std::string& key,
                                 const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(ctx + ": missing field '" + key + "'");
  return *it;
}

inline double number_field(const Json& j, const std::string& key,
                           const std::string& ctx) {
  const Json& f = require_field(j, key, ctx);
  if (!f.is_number()) throw ConfigError(ctx + "." + key + ": expected a number");
  return f.get<double>();
}

inline int int_field(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& f = require_field(j, key, ctx);
  if (!f.is_number_integer()) {
    throw ConfigError(ctx + "." + key + ": expected an integer");
  }
  return f.get<int>();
}

inline Vec vec_field(const Json& j, const std::string& key, const std::string& ctx) {
  const Json& f = require_field(j, key, ctx);
  if (!f.is_array() || f.empty()) {
    throw ConfigError(ctx + "." + key + ": expected a nonempty array of numbers");
  }
  Vec out;
  out.reserve(f.size());
  for (const Json& e : f) {
    if (!e.is_number()) {
      throw ConfigError(ctx + "." + key + ": expected a nonempty array of numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

/// Builds a set from its JSON descriptor.  expected_dim < 0 skips the
/// ambient-dimension check (used inside products).
inline ConvexSet set_from_json(const Json& j, int expected_dim,
                               const std::string& ctx) {
  using detail::int_field;
  using detail::number_field;
  using detail::require_field;
  using detail::vec_field;

  const Json& kind_j = require_field(j, "kind", ctx);
  if (!kind_j.is_string()) throw ConfigError(ctx + ".kind: expected a string");
  const std::string kind = kind_j.get<std::string>();

  ConvexSet set = [&]() -> ConvexSet {
    if (kind == "ball") {
      return ConvexSet::ball(vec_field(j, "center", ctx),
                             number_field(j, "radius", ctx));
    }
    if (kind == "box") {
      return ConvexSet::box(vec_field(j, "lower", ctx), vec_field(j, "upper", ctx));
    }
    if (kind == "halfspace") {
      return ConvexSet::halfspace(vec_field(j, "normal", ctx),
                                  number_field(j, "offset", ctx));
    }
    if (kind == "hyperplane") {
      return ConvexSet::hyperplane(vec_field(j, "normal", ctx),
                                   number_field(j, "offset", ctx));
    }
    if (kind == "affine") {
      const Json& dirs = require_field(j, "directions", ctx);
      if (!dirs.is_array()) {
        throw ConfigError(ctx + ".directions: expected an array of vectors");
      }
      std::vector<Vec> directions;
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        Json wrapper = Json::object();
        wrapper["v"] = dirs[i];
        directions.push_back(
            vec_field(wrapper, "v", ctx + ".directions[" + std::to_string(i) + "]"));
      }
      return ConvexSet::affine(vec_field(j, "point", ctx), directions);
    }
    if (kind == "singleton") {
      return ConvexSet::singleton(vec_field(j, "point", ctx));
    }
    if (kind == "simplex") {
      return ConvexSet::simplex(int_field(j, "dim", ctx));
    }
    if (kind == "translate") {
      ConvexSet inner = set_from_json(require_field(j, "inner", ctx), -1, ctx + ".inner");
      return ConvexSet::translate(std::move(inner), vec_field(j, "shift", ctx));
    }
    if (kind == "product") {
      const Json& factors_j = require_field(j, "factors", ctx);
      if (!factors_j.is_array() || factors_j.empty()) {
        throw ConfigError(ctx + ".factors: expected a nonempty array");
      }
      std::vector<ConvexSet> factors;
      for (std::size_t i = 0; i < factors_j.size(); ++i) {
        factors.push_back(set_from_json(
            factors_j[i], -1, ctx + ".factors[" + std::to_string(i) + "]"));
      }
      return ConvexSet::product(std::move(factors));
    }
    throw ConfigError(ctx + ".kind: unknown set kind '" + kind + "'");
  }();

  if (expected_dim >= 0 && set.dim() != expected_dim) {
    throw ConfigError(ctx + ": set has dimension " + std::to_string(set.dim()) +
                      ", scenario requires " + std::to_string(expected_dim));
  }
  return set;
}

inline Scenario scenario_from_json(const Json& j) {
  using detail::int_field;
  using detail::number_field;
  using detail::require_field;

  const std::string ctx = "scenario";
  Scenario sc;

  const int version = int_field(j, "schema_version", ctx);
  if (version != kSchemaVersion) {
    throw ConfigError(ctx + ".schema_version: expected " +
                      std::to_string(kSchemaVersion) + ", got " +
                      std::to_string(version));
  }

  const Json& name_j = require_field(j, "name", ctx);
  if (!name_j.is_string()) throw ConfigError(ctx + ".name: expected a string");
  sc.name = name_j.get<std::string>();

  sc.m = int_field(j, "m", ctx);
  if (sc.m < 2) {
    throw ConfigError(ctx + ".m: at least 2 sets are required, got " +
                      std::to_string(sc.m));
  }
  sc.n = int_field(j, "n", ctx);
  if (sc.n < 1) {
    throw ConfigError(ctx + ".n: dimension must be >= 1, got " + std::to_string(sc.n));
  }

  const Json& sets_j = require_field(j, "sets", ctx);
  if (!sets_j.is_array() || static_cast<int>(sets_j.size()) != sc.m) {
    throw ConfigError(ctx + ".sets: expected exactly m = " + std::to_string(sc.m) +
                      " descriptors");
  }
  for (std::size_t i = 0; i < sets_j.size(); ++i) {
    sc.sets.push_back(
        set_from_json(sets_j[i], sc.n, ctx + ".sets[" + std::to_string(i) + "]"));
    sc.set_descriptors.push_back(sets_j[i]);
  }

  if (j.contains("solver")) {
    const Json& s = j["solver"];
    const std::string sctx = ctx + ".solver";
    if (!s.is_object()) throw ConfigError(sctx + ": expected an object");
    if (s.contains("alpha")) sc.solver.alpha = number_field(s, "alpha", sctx);
    if (s.contains("lambda")) sc.solver.lambda = number_field(s, "lambda", sctx);
    if (s.contains("max_iters")) sc.solver.max_iters = int_field(s, "max_iters", sctx);
    if (s.contains("eps_solver")) {
      sc.solver.eps_solver = number_field(s, "eps_solver", sctx);
    }
    if (!(sc.solver.alpha > 0.0 && sc.solver.alpha < 1.0)) {
      throw ConfigError(sctx + ".alpha: must lie strictly between 0 and 1");
    }
    if (!(sc.solver.lambda > 0.0)) throw ConfigError(sctx + ".lambda: must be > 0");
    if (sc.solver.max_iters < 1) throw ConfigError(sctx + ".max_iters: must be >= 1");
    if (!(sc.solver.eps_solver > 0.0)) {
      throw ConfigError(sctx + ".eps_solver: must be > 0");
    }
  }

  if (j.contains("verify")) {
    const Json& v = j["verify"];
    const std::string vctx = ctx + ".verify";
    if (!v.is_object()) throw ConfigError(vctx + ": expected an object");
    if (v.contains("samples")) sc.verify.samples = int_field(v, "samples", vctx);
    if (v.contains("grid_step")) sc.verify.grid_step = number_field(v, "grid_step", vctx);
    if (v.contains("seed")) {
      sc.verify.seed = static_cast<std::uint64_t>(int_field(v, "seed", vctx));
    }
    if (v.contains("sample_radius")) {
      sc.verify.sample_radius = number_field(v, "sample_radius", vctx);
    }
    if (sc.verify.samples < 1) throw ConfigError(vctx + ".samples: must be >= 1");
    if (!(sc.verify.grid_step > 0.0)) {
      throw ConfigError(vctx + ".grid_step: must be > 0");
    }
    if (v.contains("tolerances")) {
      const Json& t = v["tolerances"];
      const std::string tctx = vctx + ".tolerances";
      if (!t.is_object()) throw ConfigError(tctx + ": expected an object");
      if (t.contains("cycle")) sc.verify.tol_cycle = number_field(t, "cycle", tctx);
      if (t.contains("equivalence")) {
        sc.verify.tol_equivalence = number_field(t, "equivalence", tctx);
      }
      if (t.contains("geometry")) {
        sc.verify.tol_geometry = number_field(t, "geometry", tctx);
      }
      if (t.contains("identity")) {
        sc.verify.tol_identity = number_field(t, "identity", tctx);
      }
      if (t.contains("saddle_certificate")) {
        sc.verify.tol_saddle_certificate = number_field(t, "saddle_certificate", tctx);
      }
      if (t.contains("d_bound")) {
        sc.verify.tol_d_bound = number_field(t, "d_bound", tctx);
      }
    }
  }

  if (j.contains("starts")) {
    const Json& st = j["starts"];
    const std::string stctx = ctx + ".starts";
    if (!st.is_array()) throw ConfigError(stctx + ": expected an array of flat tuples");
    for (std::size_t i = 0; i < st.size(); ++i) {
      Json wrapper = Json::object();
      wrapper["v"] = st[i];
      Vec flat = detail::vec_field(wrapper, "v", stctx + "[" + std::to_string(i) + "]");
      if (static_cast<int>(flat.size()) != sc.m * sc.n) {
        throw ConfigError(stctx + "[" + std::to_string(i) + "]: expected " +
                          std::to_string(sc.m * sc.n) + " numbers");
      }
      sc.starts.push_back(ProductVec::from_flat(sc.m, sc.n, std::move(flat)));
    }
  }
  if (sc.starts.empty()) {
    // Default: the zero tuple plus four seeded random starts.
    sc.starts.push_back(ProductVec(sc.m, sc.n));
    for (int i = 1; i <= 4; ++i) {
      Rng rng(sc.verify.seed ^ (0x57A5700ull + static_cast<std::uint64_t>(i)));
      ProductVec s = rng.normal_product(sc.m, sc.n);
      s *= 3.0;
      sc.starts.push_back(std::move(s));
    }
  }

  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("scenario parse error in ") + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

namespace detail {

inline Json vec_to_json(std::span<const double> v) {
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

inline Json product_vec_to_json(const ProductVec& p) {
  return vec_to_json(std::span<const double>(p.flat()));
}

/// Large finite sentinel for "no measurable value"; keeps the report plain
/// JSON (infinities would serialize as null).
inline double json_safe(double x) {
  if (x == kInf) return std::numeric_limits<double>::max();
  if (x == -kInf) return std::numeric_limits<double>::lowest();
  return x;
}

inline Json check_to_json(const CheckResult& c) {
  Json j;
  j["name"] = c.name;
  j["pass"] = c.pass;
  j["violation"] = json_safe(c.violation);
  j["tolerance"] = c.tolerance;
  Json wit = Json::array();
  for (const Witness& w : c.witnesses) {
    Json e;
    e["label"] = w.label;
    e["point"] = vec_to_json(std::span<const double>(w.point));
    wit.push_back(e);
  }
  j["witnesses"] = wit;
  Json det = Json::object();
  for (const auto& [k, v] : c.details) det[k] = json_safe(v);
  j["details"] = det;
  return j;
}

inline std::string iso_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return std::string(buf);
}

}  // namespace detail

/// Everything a run produces: the machine-readable report plus the process
/// exit code (0 all checks pass, 1 any failure or non-convergence).
struct RunOutcome {
  int exit_code = 1;
  Json report;
  std::vector<CycleResult> cycles;
  GapResult gap;
  VerificationReport verification;
};

inline const std::vector<std::string>& all_check_names() {
  static const std::vector<std::string> names = {"cycle", "pthm", "geometry",
                                                 "saddle", "dbound"};
  return names;
}

/**
 * Full pipeline on one scenario: the fixed-point solver from every start,
 * the splitting solver from three starts (agreement is part of the report),
 * then the selected checks in fixed order.  Everything in the report except
 * the timestamp object is a deterministic function of the scenario.
 */
inline RunOutcome run_scenario(const Scenario& sc,
                               const std::vector<std::string>& selected = {}) {
  detail::Stopwatch total_watch;

  std::set<std::string> wanted;
  const auto& known = all_check_names();
  if (selected.empty()) {
    wanted.insert(known.begin(), known.end());
  } else {
    for (const std::string& name : selected) {
      if (name == "all") {
        wanted.insert(known.begin(), known.end());
      } else if (std::find(known.begin(), known.end(), name) != known.end()) {
        wanted.insert(name);
      } else {
        throw ConfigError("unknown check name '" + name + "' (expected one of: " +
                          "cycle, pthm, geometry, saddle, dbound, all)");
      }
    }
  }

  const CycleOperators ops(sc.m, sc.n);
  const ConvexSet C = sc.product();

  RunOutcome out;

  // Fixed-point cycle search from every start.
  bool all_km_converged = true;
  for (const ProductVec& x0 : sc.starts) {
    out.cycles.push_back(km_fixed_point(ops, C, x0, sc.solver));
    all_km_converged = all_km_converged && out.cycles.back().converged;
  }

  // Splitting solver from three starts; the first is authoritative.
  std::vector<GapResult> gaps;
  gaps.push_back(dr_gap_solve(ops, C, sc.solver));
  for (int i = 1; i <= 2; ++i) {
    Rng rng(sc.verify.seed ^ (0xD12ull + static_cast<std::uint64_t>(i)));
    ProductVec s0 = rng.normal_product(sc.m, sc.n);
    s0 *= 5.0;
    gaps.push_back(dr_gap_solve(ops, C, sc.solver, s0));
  }
  out.gap = gaps.front();

  double gap_spread = 0.0;
  bool all_dr_converged = true;
  for (const GapResult& g : gaps) all_dr_converged = all_dr_converged && g.converged;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    for (std::size_t k = i + 1; k < gaps.size(); ++k) {
      gap_spread = std::max(gap_spread, distance(gaps[i].d, gaps[k].d));
    }
  }

  double cycle_vs_gap = 0.0;
  for (const CycleResult& cr : out.cycles) {
    if (!cr.converged) continue;
    cycle_vs_gap = std::max(cycle_vs_gap, distance(ops.apply_S(cr.z), out.gap.d));
  }

  // Checks in fixed order.
  for (const std::string& name : known) {
    if (wanted.find(name) == wanted.end()) continue;
    if (name == "cycle") {
      out.verification.checks.push_back(
          check_cycles_entry(ops, C, out.cycles, out.gap, sc.verify));
      continue;
    }
    if (name == "pthm") {
      const auto probes = make_equivalence_probes(ops, C, out.cycles,
                                                  sc.verify.samples, sc.verify.seed);
      out.verification.checks.push_back(
          check_pthm_equivalence(ops, C, out.gap.d, probes, sc.verify));
      continue;
    }
    // The remaining checks need a converged gap; record the skip otherwise.
    if (!out.gap.converged) {
      CheckResult skipped;
      skipped.name = name;
      skipped.pass = false;
      skipped.violation = std::numeric_limits<double>::max();
      skipped.tolerance = 0.0;
      skipped.details["skipped_gap_not_converged"] = 1.0;
      out.verification.checks.push_back(skipped);
      continue;
    }
    if (name == "geometry") {
      out.verification.checks.push_back(
          verify_geometry(ops, C, out.gap, out.cycles, sc.verify));
    } else if (name == "saddle") {
      out.verification.checks.push_back(saddle_check(ops, C, out.gap, sc.verify));
    } else if (name == "dbound") {
      out.verification.checks.push_back(d_bound_check(ops, C, out.gap, sc.verify));
    }
  }

  // Probe-wise certificate residual for the report.
  std::optional<double> saddle_probe_residual;
  if (out.gap.converged) {
    std::vector<ProductVec> probes;
    probes.push_back(ProductVec(sc.m, sc.n));
    for (const CycleResult& cr : out.cycles) {
      if (cr.converged) probes.push_back(cr.z);
    }
    for (const Vec& c0 :
         C.sample_points(sc.verify.samples, sc.verify.seed ^ 0xF00Dull,
                         sc.verify.sample_radius)) {
      probes.push_back(ProductVec::from_flat(sc.m, sc.n, c0));
    }
    saddle_probe_residual =
        saddle_residual(ops, C, out.gap.d, out.gap.e, probes, sc.solver);
  }

  const bool checks_pass = out.verification.all_pass();
  const bool converged = all_km_converged && all_dr_converged;
  out.exit_code = (checks_pass && converged) ? 0 : 1;

  // Assemble the report.
  Json rep;
  rep["schema_version"] = kSchemaVersion;
  rep["scenario"] = sc.name;
  rep["m"] = sc.m;
  rep["n"] = sc.n;
  {
    Json sets = Json::array();
    for (const Json& d : sc.set_descriptors) sets.push_back(d);
    rep["sets"] = sets;
  }
  {
    Json s;
    s["alpha"] = sc.solver.alpha;
    s["lambda"] = sc.solver.lambda;
    s["max_iters"] = sc.solver.max_iters;
    s["eps_solver"] = sc.solver.eps_solver;
    rep["solver"] = s;
  }
  {
    Json cyc = Json::array();
    for (std::size_t i = 0; i < out.cycles.size(); ++i) {
      const CycleResult& cr = out.cycles[i];
      Json c;
      c["start_index"] = static_cast<int>(i);
      c["z"] = detail::product_vec_to_json(cr.z);
      c["fixed_point_residual"] = cr.fixed_point_residual;
      c["iterations"] = cr.iterations;
      c["converged"] = cr.converged;
      cyc.push_back(c);
    }
    rep["cycles"] = cyc;
  }
  {
    Json g;
    g["d"] = detail::product_vec_to_json(out.gap.d);
    g["e"] = detail::product_vec_to_json(out.gap.e);
    g["v"] = detail::product_vec_to_json(out.gap.v);
    g["y_residual"] = detail::json_safe(out.gap.y_residual);
    g["D_residual"] = detail::json_safe(out.gap.D_residual);
    g["iterations"] = out.gap.iterations;
    g["converged"] = out.gap.converged;
    g["d_norm"] = norm(out.gap.d);
    rep["gap"] = g;
  }
  {
    Json a;
    a["multi_start_spread"] = detail::json_safe(gap_spread);
    a["cycle_vs_gap"] = detail::json_safe(cycle_vs_gap);
    rep["agreements"] = a;
  }
  if (saddle_probe_residual) {
    rep["saddle_residual"] = detail::json_safe(*saddle_probe_residual);
  }
  {
    Json checks = Json::array();
    for (const CheckResult& c : out.verification.checks) {
      checks.push_back(detail::check_to_json(c));
    }
    rep["checks"] = checks;
  }
  rep["pass"] = checks_pass && converged;
  {
    // All wall-clock data lives under this single key so reports are
    // byte-identical across runs once it is dropped.
    Json ts;
    ts["started"] = detail::iso_timestamp();
    Json per_check = Json::object();
    for (const CheckResult& c : out.verification.checks) {
      per_check[c.name] = c.wall_ms;
    }
    ts["checks_ms"] = per_check;
    ts["wall_ms"] = total_watch.ms();
    rep["timestamp"] = ts;
  }
  out.report = rep;
  return out;
}

inline void write_report(const Json& report, const std::string& path) {
  std::ofstream outf(path);
  if (!outf) throw ConfigError("cannot write report file: " + path);
  outf << report.dump(2) << "\n";
}

}  // namespace cyclegap

#endif  // CYCLEGAP_SCENARIO_HPP
