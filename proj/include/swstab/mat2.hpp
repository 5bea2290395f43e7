#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "swstab/error.hpp"

namespace swstab {

struct Vec2 {
  double x1{0.0};
  double x2{0.0};

  constexpr Vec2& operator+=(const Vec2& o) { x1 += o.x1; x2 += o.x2; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x1 -= o.x1; x2 -= o.x2; return *this; }
  constexpr Vec2& operator*=(double s) { x1 *= s; x2 *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x1, -a.x2}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }

/// z-component of a × b; positive when b is counterclockwise from a.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x1 * b.x2 - a.x2 * b.x1; }

inline double norm(const Vec2& v) { return std::hypot(v.x1, v.x2); }

/// Unit vector with the first nonzero component positive.
inline Vec2 canonical_direction(Vec2 v) {
  const double n = norm(v);
  if (n == 0.0) return v;
  v *= 1.0 / n;
  if (v.x1 < 0.0 || (v.x1 == 0.0 && v.x2 < 0.0)) v = -v;
  return v;
}

/// Real 2x2 matrix, row-major. Entries are checked finite on construction.
class Mat2 {
 public:
  Mat2() = default;
  Mat2(double a11, double a12, double a21, double a22) : a_{a11, a12, a21, a22} {
    for (double v : a_) {
      if (!std::isfinite(v)) throw Error(ErrorCode::invalid_input, "matrix entry is not finite");
    }
  }

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 zero() { return {}; }
  static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
  static Mat2 from_columns(const Vec2& c1, const Vec2& c2) { return {c1.x1, c2.x1, c1.x2, c2.x2}; }

  [[nodiscard]] double a11() const { return a_[0]; }
  [[nodiscard]] double a12() const { return a_[1]; }
  [[nodiscard]] double a21() const { return a_[2]; }
  [[nodiscard]] double a22() const { return a_[3]; }
  /// Zero-based (row, col) access.
  [[nodiscard]] double operator()(int r, int c) const { return a_[static_cast<std::size_t>(2 * r + c)]; }

  [[nodiscard]] Vec2 col(int c) const { return {(*this)(0, c), (*this)(1, c)}; }
  [[nodiscard]] Vec2 row(int r) const { return {(*this)(r, 0), (*this)(r, 1)}; }
  [[nodiscard]] const std::array<double, 4>& entries() const { return a_; }

  friend Mat2 operator+(const Mat2& x, const Mat2& y) {
    return {x.a_[0] + y.a_[0], x.a_[1] + y.a_[1], x.a_[2] + y.a_[2], x.a_[3] + y.a_[3]};
  }
  friend Mat2 operator-(const Mat2& x, const Mat2& y) {
    return {x.a_[0] - y.a_[0], x.a_[1] - y.a_[1], x.a_[2] - y.a_[2], x.a_[3] - y.a_[3]};
  }
  friend Mat2 operator-(const Mat2& x) { return {-x.a_[0], -x.a_[1], -x.a_[2], -x.a_[3]}; }
  friend Mat2 operator*(double s, const Mat2& x) {
    return {s * x.a_[0], s * x.a_[1], s * x.a_[2], s * x.a_[3]};
  }
  friend Mat2 operator*(const Mat2& x, double s) { return s * x; }
  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a_[0] * y.a_[0] + x.a_[1] * y.a_[2], x.a_[0] * y.a_[1] + x.a_[1] * y.a_[3],
            x.a_[2] * y.a_[0] + x.a_[3] * y.a_[2], x.a_[2] * y.a_[1] + x.a_[3] * y.a_[3]};
  }
  friend Vec2 operator*(const Mat2& x, const Vec2& v) {
    return {x.a_[0] * v.x1 + x.a_[1] * v.x2, x.a_[2] * v.x1 + x.a_[3] * v.x2};
  }
  friend bool operator==(const Mat2&, const Mat2&) = default;

 private:
  std::array<double, 4> a_{};
};

inline double trace(const Mat2& m) { return m.a11() + m.a22(); }
inline double det(const Mat2& m) { return m.a11() * m.a22() - m.a12() * m.a21(); }

/// tr(M)^2 - 4 det(M).
inline double discriminant(const Mat2& m) {
  // (a11 - a22)^2 + 4 a12 a21 is the same polynomial without the tr^2 - 4det cancellation.
  const double d = m.a11() - m.a22();
  return d * d + 4.0 * m.a12() * m.a21();
}

inline Mat2 transpose(const Mat2& m) { return {m.a11(), m.a21(), m.a12(), m.a22()}; }

/// Frobenius norm.
inline double norm(const Mat2& m) {
  const auto& a = m.entries();
  return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]);
}

inline double max_abs_entry(const Mat2& m) {
  const auto& a = m.entries();
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2]), std::abs(a[3])});
}

inline Mat2 adjugate(const Mat2& m) { return {m.a22(), -m.a12(), -m.a21(), m.a11()}; }

inline Mat2 inverse(const Mat2& m) {
  const double d = det(m);
  if (d == 0.0) throw Error(ErrorCode::degenerate_basis, "matrix is singular");
  return (1.0 / d) * adjugate(m);
}

inline Mat2 commutator(const Mat2& x, const Mat2& y) { return x * y - y * x; }

/// Traceless part M - (tr M / 2) I.
inline Mat2 traceless_part(const Mat2& m) {
  const double h = 0.5 * (m.a11() - m.a22());
  return {h, m.a12(), m.a21(), -h};
}

/// Scale-aware tolerance for sign decisions on the discriminant.
inline double discriminant_tolerance(const Mat2& m) {
  const double n = norm(m);
  return 1e-9 * std::max(1.0, n * n);
}

/// Sign of the discriminant with |delta| below discriminant_tolerance() reported as 0.
inline int discriminant_sign(const Mat2& m) {
  const double d = discriminant(m);
  const double eps = discriminant_tolerance(m);
  if (d > eps) return 1;
  if (d < -eps) return -1;
  return 0;
}

/// Planar Hurwitz test: tr < -tol and det > tol.
inline bool is_hurwitz(const Mat2& m, double tol = 0.0) { return trace(m) < -tol && det(m) > tol; }

namespace detail {

// cosh(sqrt(z)) and sinh(sqrt(z))/sqrt(z), continued analytically to z < 0, by Taylor series.
inline void even_odd_series(double z, double& c, double& s) {
  double term_c = 1.0;
  double term_s = 1.0;
  c = 1.0;
  s = 1.0;
  for (int k = 1; k <= 10; ++k) {
    term_c *= z / ((2.0 * k - 1.0) * (2.0 * k));
    term_s *= z / ((2.0 * k) * (2.0 * k + 1.0));
    c += term_c;
    s += term_s;
  }
}

}  // namespace detail

/// e^{tM} in closed form.
///
/// With M = mu I + N, N traceless, N^2 = q I and q = delta_M / 4, so
/// e^{tM} = e^{mu t} (C I + t S N) where C, S are cosh/sinhc of t sqrt(q) for q > 0 and
/// cos/sinc of t sqrt(-q) for q < 0. Near q t^2 = 0 both are evaluated from their power
/// series, which is exact at the defective limit and continuous on both sides of it.
inline Mat2 expm(const Mat2& m, double t) {
  const double mu = 0.5 * trace(m);
  const Mat2 n = traceless_part(m);
  const double q = n.a11() * n.a11() + n.a12() * n.a21();
  const double z = q * t * t;
  double ci = 0.0;  // coefficient of I
  double cn = 0.0;  // coefficient of N
  if (std::abs(z) < 1e-2) {
    double c = 0.0;
    double s = 0.0;
    detail::even_odd_series(z, c, s);
    const double e = std::exp(mu * t);
    ci = e * c;
    cn = e * s * t;
  } else if (z > 0.0) {
    const double r = std::sqrt(z);
    const double ep = std::exp(mu * t + r);
    const double em = std::exp(mu * t - r);
    ci = 0.5 * (ep + em);
    cn = 0.5 * (ep - em) * t / r;
  } else {
    const double r = std::sqrt(-z);
    const double e = std::exp(mu * t);
    ci = e * std::cos(r);
    cn = e * std::sin(r) * t / r;
  }
  return {ci + cn * n.a11(), cn * n.a12(), cn * n.a21(), ci + cn * n.a22()};
}

enum class EigenKind { real_distinct, real_repeated_diagonalizable, real_repeated_defective, complex_conjugate };

inline std::string to_string(EigenKind k) {
  switch (k) {
    case EigenKind::real_distinct: return "real-distinct";
    case EigenKind::real_repeated_diagonalizable: return "real-repeated-diagonalizable";
    case EigenKind::real_repeated_defective: return "real-repeated-defective";
    case EigenKind::complex_conjugate: return "complex-conjugate";
  }
  return "unknown";
}

struct EigenStructure {
  EigenKind kind{EigenKind::real_distinct};
  /// Real kinds: values[0] >= values[1]. Complex kind: values[0] has positive imaginary part.
  std::array<std::complex<double>, 2> values{};
  /// Unit, canonical-sign eigenvectors; values[i] pairs with vectors[i] when both exist.
  std::vector<Vec2> vectors;
};

namespace detail {

// Kernel direction of a (numerically) rank-one matrix from its dominant row.
inline Vec2 kernel_direction(const Mat2& k) {
  const Vec2 r0 = k.row(0);
  const Vec2 r1 = k.row(1);
  const Vec2 r = norm(r0) >= norm(r1) ? r0 : r1;
  return canonical_direction({-r.x2, r.x1});
}

}  // namespace detail

/// Eigen-structure from the characteristic polynomial; the kind is decided by the sign of
/// the discriminant against `tol` (defaults to discriminant_tolerance(M)).
inline EigenStructure eigen(const Mat2& m, double tol = -1.0) {
  if (tol < 0.0) tol = discriminant_tolerance(m);
  const double tr = trace(m);
  const double d = discriminant(m);
  EigenStructure es;
  if (d > tol) {
    es.kind = EigenKind::real_distinct;
    const double sq = std::sqrt(d);
    // Larger-magnitude root first, then det / root, avoiding cancellation.
    const double big = 0.5 * (tr + (tr >= 0.0 ? sq : -sq));
    const double small = big != 0.0 ? det(m) / big : 0.5 * (tr - sq);
    const double hi = std::max(big, small);
    const double lo = std::min(big, small);
    es.values = {std::complex<double>(hi), std::complex<double>(lo)};
    es.vectors = {detail::kernel_direction(m - hi * Mat2::identity()),
                  detail::kernel_direction(m - lo * Mat2::identity())};
  } else if (d < -tol) {
    es.kind = EigenKind::complex_conjugate;
    const double im = 0.5 * std::sqrt(-d);
    es.values = {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
  } else {
    const double lambda = 0.5 * tr;
    es.values = {std::complex<double>(lambda), std::complex<double>(lambda)};
    const Mat2 n = traceless_part(m);
    if (norm(n) <= 1e-9 * std::max(1.0, norm(m))) {
      es.kind = EigenKind::real_repeated_diagonalizable;
      es.vectors = {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    } else {
      es.kind = EigenKind::real_repeated_defective;
      es.vectors = {detail::kernel_direction(n)};
    }
  }
  return es;
}

/// Eigenvalues of a symmetric matrix [[a, b], [b, c]] in decreasing order, with unit eigenvectors.
struct SymmetricEigen {
  double hi{0.0};
  double lo{0.0};
  Vec2 v_hi{1.0, 0.0};
  Vec2 v_lo{0.0, 1.0};
};

inline SymmetricEigen symmetric_eigen(double a, double b, double c) {
  SymmetricEigen se;
  const double mean = 0.5 * (a + c);
  const double half_diff = 0.5 * (a - c);
  const double r = std::hypot(half_diff, b);
  se.hi = mean + r;
  se.lo = mean - r;
  if (r == 0.0) return se;
  // Angle of the top eigenvector: tan(2 theta) = 2b / (a - c).
  const double theta = 0.5 * std::atan2(b, half_diff);
  se.v_hi = {std::cos(theta), std::sin(theta)};
  se.v_lo = {-std::sin(theta), std::cos(theta)};
  return se;
}

}  // namespace swstab
