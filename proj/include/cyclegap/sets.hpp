#ifndef CYCLEGAP_SETS_HPP
#define CYCLEGAP_SETS_HPP

#include <algorithm>
#include <memory>
#include <numeric>
#include <optional>
#include <variant>
#include <vector>

#include "cyclegap/core.hpp"

namespace cyclegap {

/**
 * Declarative nonempty closed convex set over R^d with exact projection,
 * support function (extended-real valued, +inf for unbounded directions),
 * support point (argmax of <.,t> when attained) and tolerance-controlled
 * membership.  Every kind has a closed-form projection; nonemptiness is
 * enforced at construction.  Descriptors are immutable.
 *
 * Support values use IEEE +inf as the extended real: it absorbs addition and
 * makes every "<= 0" test fail, which is exactly the convention needed.
 */
class ConvexSet {
 public:
  enum class Kind {
    ball,
    box,
    halfspace,   // {x : <a,x> <= b}
    hyperplane,  // {x : <a,x> = b}
    affine,      // {p + span(basis)}
    singleton,
    simplex,     // standard probability simplex of the ambient dimension
    translate,
    product,
  };

  // -- factories (each validates the nonempty-closed-convex invariants) -----

  static ConvexSet ball(Vec center, double radius) {
    if (center.empty()) throw ConfigError("ball: empty center");
    if (!(radius > 0.0)) throw ConfigError("ball: radius must be > 0");
    ConvexSet s;
    s.dim_ = static_cast<int>(center.size());
    s.node_ = BallData{std::move(center), radius};
    return s;
  }

  static ConvexSet box(Vec lower, Vec upper) {
    if (lower.empty() || lower.size() != upper.size()) {
      throw ConfigError("box: bounds must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] <= upper[i])) {
        throw ConfigError("box: lower > upper at coordinate " + std::to_string(i));
      }
    }
    ConvexSet s;
    s.dim_ = static_cast<int>(lower.size());
    s.node_ = BoxData{std::move(lower), std::move(upper)};
    return s;
  }

  static ConvexSet halfspace(Vec normal, double offset) {
    const double nn = norm(std::span<const double>(normal));
    if (normal.empty() || nn == 0.0) throw ConfigError("halfspace: normal must be nonzero");
    ConvexSet s;
    s.dim_ = static_cast<int>(normal.size());
    s.node_ = HalfspaceData{std::move(normal), offset, nn * nn};
    return s;
  }

  static ConvexSet hyperplane(Vec normal, double offset) {
    const double nn = norm(std::span<const double>(normal));
    if (normal.empty() || nn == 0.0) throw ConfigError("hyperplane: normal must be nonzero");
    ConvexSet s;
    s.dim_ = static_cast<int>(normal.size());
    s.node_ = HyperplaneData{std::move(normal), offset, nn * nn};
    return s;
  }

  /// Affine subspace through `point` spanned by `directions`.  The basis is
  /// orthonormalized once here, so projection is a plain matrix multiply and
  /// idempotent to rounding.  Dependent directions are dropped.
  static ConvexSet affine(Vec point, const std::vector<Vec>& directions) {
    if (point.empty()) throw ConfigError("affine: empty point");
    const int d = static_cast<int>(point.size());
    std::vector<Vec> basis;
    for (const Vec& dir : directions) {
      if (static_cast<int>(dir.size()) != d) {
        throw ConfigError("affine: direction/point dimension mismatch");
      }
      Vec w = dir;
      const double scale = norm(std::span<const double>(dir));
      for (int pass = 0; pass < 2; ++pass) {  // twice-is-enough reorthogonalization
        for (const Vec& b : basis) {
          const double c = dot(w, b);
          for (int i = 0; i < d; ++i) w[i] -= c * b[i];
        }
      }
      const double r = norm(std::span<const double>(w));
      if (r > 1e-12 * std::max(1.0, scale)) {
        for (double& x : w) x /= r;
        basis.push_back(std::move(w));
      }
    }
    ConvexSet s;
    s.dim_ = d;
    s.node_ = AffineData{std::move(point), std::move(basis)};
    return s;
  }

  static ConvexSet singleton(Vec point) {
    if (point.empty()) throw ConfigError("singleton: empty point");
    ConvexSet s;
    s.dim_ = static_cast<int>(point.size());
    s.node_ = SingletonData{std::move(point)};
    return s;
  }

  static ConvexSet simplex(int dim) {
    if (dim < 1) throw ConfigError("simplex: dimension must be >= 1");
    ConvexSet s;
    s.dim_ = dim;
    s.node_ = SimplexData{};
    return s;
  }

  /// {c + shift : c in inner}.
  static ConvexSet translate(ConvexSet inner, Vec shift) {
    if (static_cast<int>(shift.size()) != inner.dim_) {
      throw ConfigError("translate: shift/inner dimension mismatch");
    }
    ConvexSet s;
    s.dim_ = inner.dim_;
    TranslateData t;
    t.inner.push_back(std::move(inner));
    t.shift = std::move(shift);
    s.node_ = std::move(t);
    return s;
  }

  static ConvexSet product(std::vector<ConvexSet> factors) {
    if (factors.empty()) throw ConfigError("product: needs at least one factor");
    ConvexSet s;
    s.dim_ = 0;
    for (const ConvexSet& f : factors) s.dim_ += f.dim_;
    s.node_ = ProductData{std::move(factors)};
    return s;
  }

  // -- queries --------------------------------------------------------------

  Kind kind() const { return static_cast<Kind>(node_.index()); }
  int dim() const { return dim_; }

  const std::vector<ConvexSet>& factors() const {
    return std::get<ProductData>(node_).factors;
  }

  /// Nearest point of the set.  Idempotent; satisfies the variational
  /// inequality <x - Px, c - Px> <= 0 for every c in the set.
  Vec project(std::span<const double> x) const {
    check_dim(x.size());
    Vec out(dim_);
    project_into(x, out);
    return out;
  }

  Vec project(const Vec& x) const { return project(std::span<const double>(x)); }

  ProductVec project(const ProductVec& x) const {
    check_dim(x.flat().size());
    Vec out(dim_);
    project_into(x.flat(), out);
    return ProductVec::from_flat(x.blocks(), x.dim(), std::move(out));
  }

  /// sup over the set of <., t>; +inf in unbounded directions.
  double support(std::span<const double> t) const {
    check_dim(t.size());
    return support_impl(t);
  }
  double support(const Vec& t) const { return support(std::span<const double>(t)); }
  double support(const ProductVec& t) const {
    return support(std::span<const double>(t.flat()));
  }

  /// Argmax of <., t> over the set when the support is finite (always
  /// attained for this catalog); absent when the support is +inf.
  std::optional<Vec> support_point(std::span<const double> t) const {
    check_dim(t.size());
    return support_point_impl(t);
  }
  std::optional<Vec> support_point(const Vec& t) const {
    return support_point(std::span<const double>(t));
  }

  double distance(std::span<const double> x) const {
    const Vec p = project(x);
    return cyclegap::distance(x, std::span<const double>(p));
  }
  double distance(const Vec& x) const { return distance(std::span<const double>(x)); }
  double distance(const ProductVec& x) const {
    return distance(std::span<const double>(x.flat()));
  }

  bool contains(std::span<const double> x, double tol) const {
    if (tol < 0.0) throw ConfigError("contains: tol must be >= 0");
    return distance(x) <= tol;
  }
  bool contains(const Vec& x, double tol) const {
    return contains(std::span<const double>(x), tol);
  }
  bool contains(const ProductVec& x, double tol) const {
    return contains(std::span<const double>(x.flat()), tol);
  }

  /**
   * k deterministic points inside the set: projections of Gaussian draws of
   * varying scale around the projection of the origin.  Bounded kinds get an
   * interior/boundary mix; unbounded kinds stay within `radius` of the
   * origin's projection.
   */
  std::vector<Vec> sample_points(int k, std::uint64_t seed,
                                 double radius = 10.0) const {
    if (k < 1) throw ConfigError("sample_points: k must be >= 1");
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    const Vec origin(dim_, 0.0);
    const Vec anchor = project(origin);
    std::vector<Vec> pts;
    pts.reserve(k);
    for (int i = 0; i < k; ++i) {
      const double scale = radius * rng.uniform();
      Vec g(dim_);
      for (int j = 0; j < dim_; ++j) g[j] = anchor[j] + scale * rng.normal();
      pts.push_back(project(g));
    }
    return pts;
  }

 private:
  struct BallData {
    Vec center;
    double radius;
  };
  struct BoxData {
    Vec lower, upper;
  };
  struct HalfspaceData {
    Vec normal;
    double offset;
    double normal_sq;
  };
  struct HyperplaneData {
    Vec normal;
    double offset;
    double normal_sq;
  };
  struct AffineData {
    Vec point;
    std::vector<Vec> basis;  // orthonormal rows
  };
  struct SingletonData {
    Vec point;
  };
  struct SimplexData {};
  struct TranslateData {
    std::vector<ConvexSet> inner;  // exactly one element
    Vec shift;
  };
  struct ProductData {
    std::vector<ConvexSet> factors;
  };

  // Variant order must match Kind.
  using Node = std::variant<BallData, BoxData, HalfspaceData, HyperplaneData,
                            AffineData, SingletonData, SimplexData,
                            TranslateData, ProductData>;

  ConvexSet() = default;

  void check_dim(std::size_t got) const {
    if (static_cast<int>(got) != dim_) {
      throw DimensionError("ConvexSet: operand has length " + std::to_string(got) +
                           ", set lives in R^" + std::to_string(dim_));
    }
  }

  void project_into(std::span<const double> x, std::span<double> out) const {
    switch (kind()) {
      case Kind::ball: {
        const auto& b = std::get<BallData>(node_);
        double dist2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double d = x[i] - b.center[i];
          dist2 += d * d;
        }
        const double dist = std::sqrt(dist2);
        const double scale = (dist <= b.radius) ? 1.0 : b.radius / dist;
        for (int i = 0; i < dim_; ++i) {
          out[i] = b.center[i] + scale * (x[i] - b.center[i]);
        }
        return;
      }
      case Kind::box: {
        const auto& b = std::get<BoxData>(node_);
        for (int i = 0; i < dim_; ++i) {
          out[i] = std::clamp(x[i], b.lower[i], b.upper[i]);
        }
        return;
      }
      case Kind::halfspace: {
        const auto& h = std::get<HalfspaceData>(node_);
        const double excess = std::max(0.0, dot(x, h.normal) - h.offset);
        const double c = excess / h.normal_sq;
        for (int i = 0; i < dim_; ++i) out[i] = x[i] - c * h.normal[i];
        return;
      }
      case Kind::hyperplane: {
        const auto& h = std::get<HyperplaneData>(node_);
        const double c = (dot(x, h.normal) - h.offset) / h.normal_sq;
        for (int i = 0; i < dim_; ++i) out[i] = x[i] - c * h.normal[i];
        return;
      }
      case Kind::affine: {
        const auto& a = std::get<AffineData>(node_);
        for (int i = 0; i < dim_; ++i) out[i] = a.point[i];
        for (const Vec& b : a.basis) {
          double c = 0.0;
          for (int i = 0; i < dim_; ++i) c += b[i] * (x[i] - a.point[i]);
          for (int i = 0; i < dim_; ++i) out[i] += c * b[i];
        }
        return;
      }
      case Kind::singleton: {
        const auto& s = std::get<SingletonData>(node_);
        std::copy(s.point.begin(), s.point.end(), out.begin());
        return;
      }
      case Kind::simplex: {
        project_simplex(x, out);
        return;
      }
      case Kind::translate: {
        const auto& t = std::get<TranslateData>(node_);
        Vec shifted(dim_);
        for (int i = 0; i < dim_; ++i) shifted[i] = x[i] - t.shift[i];
        t.inner.front().project_into(shifted, out);
        for (int i = 0; i < dim_; ++i) out[i] += t.shift[i];
        return;
      }
      case Kind::product: {
        const auto& p = std::get<ProductData>(node_);
        int off = 0;
        for (const ConvexSet& f : p.factors) {
          f.project_into(x.subspan(off, f.dim_), out.subspan(off, f.dim_));
          off += f.dim_;
        }
        return;
      }
    }
  }

  /// Sort-based projection onto {x >= 0, sum x = 1}; exact in finitely many
  /// steps, ties broken by coordinate index.
  void project_simplex(std::span<const double> x, std::span<double> out) const {
    const int d = dim_;
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
      if (x[i] != x[j]) return x[i] > x[j];
      return i < j;
    });
    double running = 0.0;
    double tau = 0.0;
    int active = 0;
    for (int j = 0; j < d; ++j) {
      running += x[order[j]];
      const double cand = (1.0 - running) / (j + 1);
      if (x[order[j]] + cand > 0.0) {
        tau = cand;
        active = j + 1;
      }
    }
    (void)active;
    for (int i = 0; i < d; ++i) out[i] = std::max(0.0, x[i] + tau);
  }

  double support_impl(std::span<const double> t) const {
    const double cone_tol = default_tolerances().cone;
    switch (kind()) {
      case Kind::ball: {
        const auto& b = std::get<BallData>(node_);
        return dot(b.center, t) + b.radius * norm(t);
      }
      case Kind::box: {
        const auto& b = std::get<BoxData>(node_);
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
          s += std::max(b.lower[i] * t[i], b.upper[i] * t[i]);
        }
        return s;
      }
      case Kind::halfspace: {
        // Finite exactly when t = lambda * normal with lambda >= 0.
        const auto& h = std::get<HalfspaceData>(node_);
        const double tn = norm(t);
        if (tn == 0.0) return 0.0;
        const double lambda = dot(t, h.normal) / h.normal_sq;
        double resid2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double r = t[i] - lambda * h.normal[i];
          resid2 += r * r;
        }
        const double band = cone_tol * tn;
        if (std::sqrt(resid2) > band) return kInf;
        if (lambda * std::sqrt(h.normal_sq) < -band) return kInf;
        return std::max(lambda, 0.0) * h.offset;
      }
      case Kind::hyperplane: {
        const auto& h = std::get<HyperplaneData>(node_);
        const double tn = norm(t);
        if (tn == 0.0) return 0.0;
        const double lambda = dot(t, h.normal) / h.normal_sq;
        double resid2 = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const double r = t[i] - lambda * h.normal[i];
          resid2 += r * r;
        }
        if (std::sqrt(resid2) > cone_tol * tn) return kInf;
        return lambda * h.offset;
      }
      case Kind::affine: {
        // Finite exactly when t is orthogonal to the direction space.
        const auto& a = std::get<AffineData>(node_);
        const double tn = norm(t);
        if (tn == 0.0) return 0.0;
        double tang2 = 0.0;
        for (const Vec& b : a.basis) {
          const double c = dot(b, t);
          tang2 += c * c;
        }
        if (std::sqrt(tang2) > cone_tol * tn) return kInf;
        return dot(a.point, t);
      }
      case Kind::singleton:
        return dot(std::get<SingletonData>(node_).point, t);
      case Kind::simplex: {
        double best = t[0];
        for (int i = 1; i < dim_; ++i) best = std::max(best, t[i]);
        return best;
      }
      case Kind::translate: {
        const auto& tr = std::get<TranslateData>(node_);
        return tr.inner.front().support_impl(t) + dot(tr.shift, t);
      }
      case Kind::product: {
        const auto& p = std::get<ProductData>(node_);
        double s = 0.0;
        int off = 0;
        for (const ConvexSet& f : p.factors) {
          s += f.support_impl(t.subspan(off, f.dim_));  // +inf absorbs
          off += f.dim_;
        }
        return s;
      }
    }
    return kInf;  // unreachable
  }

  std::optional<Vec> support_point_impl(std::span<const double> t) const {
    switch (kind()) {
      case Kind::ball: {
        const auto& b = std::get<BallData>(node_);
        const double tn = norm(t);
        if (tn == 0.0) return b.center;
        Vec p(dim_);
        for (int i = 0; i < dim_; ++i) p[i] = b.center[i] + b.radius * t[i] / tn;
        return p;
      }
      case Kind::box: {
        const auto& b = std::get<BoxData>(node_);
        Vec p(dim_);
        for (int i = 0; i < dim_; ++i) p[i] = (t[i] > 0.0) ? b.upper[i] : b.lower[i];
        return p;
      }
      case Kind::halfspace: {
        const auto& h = std::get<HalfspaceData>(node_);
        if (support_impl(t) == kInf) return std::nullopt;
        // Any boundary point attains; use the foot of the origin.
        Vec p(dim_);
        const double c = h.offset / h.normal_sq;
        for (int i = 0; i < dim_; ++i) p[i] = c * h.normal[i];
        return p;
      }
      case Kind::hyperplane: {
        const auto& h = std::get<HyperplaneData>(node_);
        if (support_impl(t) == kInf) return std::nullopt;
        Vec p(dim_);
        const double c = h.offset / h.normal_sq;
        for (int i = 0; i < dim_; ++i) p[i] = c * h.normal[i];
        return p;
      }
      case Kind::affine: {
        const auto& a = std::get<AffineData>(node_);
        if (support_impl(t) == kInf) return std::nullopt;
        return a.point;
      }
      case Kind::singleton:
        return std::get<SingletonData>(node_).point;
      case Kind::simplex: {
        int best = 0;
        for (int i = 1; i < dim_; ++i) {
          if (t[i] > t[best]) best = i;  // first max wins ties
        }
        Vec p(dim_, 0.0);
        p[best] = 1.0;
        return p;
      }
      case Kind::translate: {
        const auto& tr = std::get<TranslateData>(node_);
        auto inner_pt = tr.inner.front().support_point_impl(t);
        if (!inner_pt) return std::nullopt;
        for (int i = 0; i < dim_; ++i) (*inner_pt)[i] += tr.shift[i];
        return inner_pt;
      }
      case Kind::product: {
        const auto& p = std::get<ProductData>(node_);
        Vec out(dim_);
        int off = 0;
        for (const ConvexSet& f : p.factors) {
          auto block = f.support_point_impl(t.subspan(off, f.dim_));
          if (!block) return std::nullopt;
          std::copy(block->begin(), block->end(), out.begin() + off);
          off += f.dim_;
        }
        return out;
      }
    }
    return std::nullopt;  // unreachable
  }

  int dim_ = 0;
  Node node_;
};

}  // namespace cyclegap

#endif  // CYCLEGAP_SETS_HPP
