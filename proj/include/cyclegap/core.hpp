#ifndef CYCLEGAP_CORE_HPP
#define CYCLEGAP_CORE_HPP

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cyclegap {

/// An element of the base space H = R^n.
using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not match.
struct DimensionError : Error {
  using Error::Error;
};

/// A solver could not produce a usable result (e.g. ill-conditioned system).
struct SolverError : Error {
  using Error::Error;
};

/// Malformed scenario / configuration input.
struct ConfigError : Error {
  using Error::Error;
};

/// Default tolerance constants, kept in one place so tests and solvers agree.
struct Tolerances {
  double feas = 1e-9;           // set-membership slack
  double linear = 1e-10;        // linear-solve backward error
  double solver = 1e-8;         // iterative-solver stopping target
  double cone = 1e-10;          // relative residual for "t lies in this cone" tests
  double identity = 1e-10;      // operator-identity violation bound
  double max_condition = 1e12;  // dense solves refuse matrices beyond this
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

// ---------------------------------------------------------------------------
// Vec helpers

inline double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("dot: length mismatch " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

inline double distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline Vec operator+(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw DimensionError("Vec +: length mismatch");
  Vec w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] + v[i];
  return w;
}

inline Vec operator-(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw DimensionError("Vec -: length mismatch");
  Vec w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] - v[i];
  return w;
}

inline Vec operator*(double a, const Vec& u) {
  Vec w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) w[i] = a * u[i];
  return w;
}

// ---------------------------------------------------------------------------
// ProductVec

/**
 * A point of the product space X = H^m, stored as m contiguous blocks of
 * dimension n.  The block view is the public contract; all cycle operators
 * act blockwise.  Immutable use is safe across threads.
 */
class ProductVec {
 public:
  ProductVec() = default;

  ProductVec(int blocks, int dim) : m_(blocks), n_(dim) {
    if (blocks < 1 || dim < 1) {
      throw DimensionError("ProductVec: needs blocks >= 1 and dim >= 1");
    }
    data_.assign(static_cast<std::size_t>(blocks) * dim, 0.0);
  }

  static ProductVec from_blocks(const std::vector<Vec>& blocks) {
    if (blocks.empty()) throw DimensionError("from_blocks: no blocks");
    ProductVec x(static_cast<int>(blocks.size()),
                 static_cast<int>(blocks.front().size()));
    for (int i = 0; i < x.m_; ++i) {
      if (static_cast<int>(blocks[i].size()) != x.n_) {
        throw DimensionError("from_blocks: ragged block sizes");
      }
      std::copy(blocks[i].begin(), blocks[i].end(), x.block(i).begin());
    }
    return x;
  }

  static ProductVec from_flat(int blocks, int dim, Vec flat) {
    if (static_cast<int>(flat.size()) != blocks * dim) {
      throw DimensionError("from_flat: size mismatch");
    }
    ProductVec x;
    x.m_ = blocks;
    x.n_ = dim;
    x.data_ = std::move(flat);
    return x;
  }

  int blocks() const { return m_; }
  int dim() const { return n_; }
  int size() const { return m_ * n_; }

  std::span<double> block(int i) {
    return {data_.data() + static_cast<std::size_t>(i) * n_,
            static_cast<std::size_t>(n_)};
  }
  std::span<const double> block(int i) const {
    return {data_.data() + static_cast<std::size_t>(i) * n_,
            static_cast<std::size_t>(n_)};
  }
  Vec block_vec(int i) const {
    auto b = block(i);
    return Vec(b.begin(), b.end());
  }

  Vec& flat() { return data_; }
  const Vec& flat() const { return data_; }

  bool same_shape(const ProductVec& o) const { return m_ == o.m_ && n_ == o.n_; }

  ProductVec& operator+=(const ProductVec& o) {
    check_shape(o, "+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  ProductVec& operator-=(const ProductVec& o) {
    check_shape(o, "-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  ProductVec& operator*=(double a) {
    for (double& v : data_) v *= a;
    return *this;
  }

  friend ProductVec operator+(ProductVec a, const ProductVec& b) { return a += b; }
  friend ProductVec operator-(ProductVec a, const ProductVec& b) { return a -= b; }
  friend ProductVec operator*(double a, ProductVec x) { return x *= a; }

 private:
  void check_shape(const ProductVec& o, const char* op) const {
    if (!same_shape(o)) {
      throw DimensionError(std::string("ProductVec ") + op + ": shape (" +
                           std::to_string(m_) + "," + std::to_string(n_) +
                           ") vs (" + std::to_string(o.m_) + "," +
                           std::to_string(o.n_) + ")");
    }
  }

  int m_ = 0;
  int n_ = 0;
  Vec data_;
};

/// Sum over blocks and coordinates of entrywise products.
inline double inner_product(const ProductVec& u, const ProductVec& v) {
  if (!u.same_shape(v)) {
    throw DimensionError("inner_product: shape mismatch");
  }
  return dot(u.flat(), v.flat());
}

inline double norm(const ProductVec& u) { return norm(std::span<const double>(u.flat())); }

inline double distance(const ProductVec& u, const ProductVec& v) {
  if (!u.same_shape(v)) throw DimensionError("distance: shape mismatch");
  return distance(std::span<const double>(u.flat()),
                  std::span<const double>(v.flat()));
}

// ---------------------------------------------------------------------------
// DenseMatrix

/// Row-major dense matrix; hosts general linear maps for the isometry
/// diagnostic and the linear resolvent.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  Vec data;  // row-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
    if (r < 1 || c < 1) throw DimensionError("DenseMatrix: needs positive shape");
  }

  static DenseMatrix identity(int d) {
    DenseMatrix m(d, d);
    for (int i = 0; i < d; ++i) m.at(i, i) = 1.0;
    return m;
  }

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  Vec apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != cols) {
      throw DimensionError("DenseMatrix::apply: expected length " +
                           std::to_string(cols));
    }
    Vec y(rows, 0.0);
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      const double* row = data.data() + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }
};

// ---------------------------------------------------------------------------
// Deterministic RNG
//
// std::mt19937_64 has a pinned sequence, but the std distributions do not, so
// uniform/normal are generated by hand to keep committed fixtures portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec normal_vec(int d) {
    Vec v(d);
    for (double& x : v) x = normal();
    return v;
  }

  ProductVec normal_product(int m, int n) {
    ProductVec x(m, n);
    for (double& v : x.flat()) v = normal();
    return x;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Logging (gated by CYCLEGAP_LOG in {error, info, debug}; default error)

enum class LogLevel : int { error = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("CYCLEGAP_LOG");
    if (env == nullptr) return LogLevel::error;
    const std::string s(env);
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    return LogLevel::error;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << "[cyclegap] " << msg << "\n";
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::cerr << "[cyclegap] " << msg << "\n";
}

inline std::string format_vec(std::span<const double> v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ")";
  return os.str();
}

}  // namespace cyclegap

#endif  // CYCLEGAP_CORE_HPP
