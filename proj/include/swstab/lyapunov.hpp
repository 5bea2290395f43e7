#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>

#include "swstab/error.hpp"
#include "swstab/invariants.hpp"
#include "swstab/mat2.hpp"
#include "swstab/normal_form.hpp"

namespace swstab {

/// phi(s) = det(s A1 + (1 - s) A2) and psi(s) = det(s A1 + (1 - s) A2^{-1}) in the form
///   phi(s) = s^2 p0 + 2 s (1 - s) p1 + (1 - s)^2 p2           with (p0, p1, p2) = (det1, Gamma, det2)
///   psi(s) = (s^2 q0 + s (1 - s) q1 + (1 - s)^2 q2) / det2   with (q0, q1, q2) = (det1 det2, tr(A1 A2), 1)
struct SigmaPolys {
  std::array<double, 3> phi_coeffs{};
  std::array<double, 3> psi_coeffs{};
  double det2{1.0};
  std::optional<double> sigma0;
  std::optional<double> phi_at_sigma0;

  [[nodiscard]] double phi(double s) const {
    const double r = 1.0 - s;
    return s * s * phi_coeffs[0] + 2.0 * s * r * phi_coeffs[1] + r * r * phi_coeffs[2];
  }
  [[nodiscard]] double psi(double s) const {
    const double r = 1.0 - s;
    return (s * s * psi_coeffs[0] + s * r * psi_coeffs[1] + r * r * psi_coeffs[2]) / det2;
  }
};

inline SigmaPolys sigma_polys(const Mat2& a1, const Mat2& a2) {
  const double d1 = det(a1);
  const double d2 = det(a2);
  if (d2 == 0.0) throw Error(ErrorCode::singular_a2, "psi needs an invertible A2");
  const double g = gamma(a1, a2);
  SigmaPolys sp;
  sp.phi_coeffs = {d1, g, d2};
  sp.psi_coeffs = {d1 * d2, trace(a1 * a2), 1.0};
  sp.det2 = d2;
  const double denom = d1 + d2 - 2.0 * g;
  if (denom != 0.0) {
    const double s0 = (d2 - g) / denom;
    if (s0 > 0.0 && s0 < 1.0) {
      sp.sigma0 = s0;
      sp.phi_at_sigma0 = sp.phi(s0);
    }
  }
  return sp;
}

/// Both quadratics positive on [0, 1]: Gamma > -sqrt(det1 det2) and tr(A1 A2) > -2 sqrt(det1 det2).
inline bool has_quadratic_clf(const Mat2& a1, const Mat2& a2) {
  const double root = std::sqrt(det(a1) * det(a2));
  return gamma(a1, a2) > -root && trace(a1 * a2) > -2.0 * root;
}

/// V(x) = x^T P x with P = [[p11, p12], [p12, p22]].
struct QuadraticForm {
  double p11{1.0};
  double p12{0.0};
  double p22{1.0};
  bool strict{false};

  [[nodiscard]] Mat2 matrix() const { return {p11, p12, p12, p22}; }
  [[nodiscard]] double operator()(const Vec2& x) const {
    return p11 * x.x1 * x.x1 + 2.0 * p12 * x.x1 * x.x2 + p22 * x.x2 * x.x2;
  }
  [[nodiscard]] bool positive_definite() const { return p11 > 0.0 && p11 * p22 - p12 * p12 > 0.0; }
};

/// Largest eigenvalue of A^T P + P A.
inline double lie_derivative_max_eigenvalue(const Mat2& a, const QuadraticForm& v) {
  const Mat2 p = v.matrix();
  const Mat2 l = transpose(a) * p + p * a;
  return symmetric_eigen(l.a11(), 0.5 * (l.a12() + l.a21()), l.a22()).hi;
}

/// Strict certificate test: both Lie derivatives have max eigenvalue below -1e-12 |P| |A_i|.
inline bool certifies_strictly(const QuadraticForm& v, const Mat2& a1, const Mat2& a2) {
  if (!v.positive_definite()) return false;
  const double pn = norm(v.matrix());
  return lie_derivative_max_eigenvalue(a1, v) < -1e-12 * pn * norm(a1) &&
         lie_derivative_max_eigenvalue(a2, v) < -1e-12 * pn * norm(a2);
}

/// The nonstrict common quadratic LF of a pair on the S3 boundary Gamma = -sqrt(det1 det2).
///
/// In normal-form coordinates
///   V = x1^2 + (s1 s2 - F^2)^2 / (4 F^2 (tau1 F - tau2 s1)^2) x2^2,   s_i = sign(delta_i),
/// pulled back to the original coordinates as P = T^{-T} diag(1, c) T^{-1}.
/// `band` is the relative width of the boundary test, as in classify().
inline QuadraticForm nonstrict_clf_s3(const NormalFormResult& nf, double band = 1e-9) {
  if (nf.case_tag != NormalFormCase::c1a || !nf.f) {
    throw Error(ErrorCode::wrong_case, "S3 certificate needs a case-1a normal form, got " + to_string(nf.case_tag));
  }
  const double d1 = det(nf.b1);
  const double d2 = det(nf.b2);
  const double g = gamma(nf.b1, nf.b2);
  if (std::abs(g + std::sqrt(d1 * d2)) > band * (1.0 + d1 * d2)) {
    throw Error(ErrorCode::wrong_case, "pair is not on the Gamma = -sqrt(det1 det2) boundary");
  }
  const double f = *nf.f;
  const double s1 = nf.sign1;
  const double s2 = nf.sign2;
  const double tau1 = nf.b1.a11();
  const double tau2 = nf.b2.a11();
  const double lin = tau1 * f - tau2 * s1;
  if (f == 0.0 || lin == 0.0) throw Error(ErrorCode::degenerate_basis, "S3 coefficient has a zero denominator");
  const double num = s1 * s2 - f * f;
  const double c = num * num / (4.0 * f * f * lin * lin);

  const Mat2 ti = inverse(nf.t);
  const Mat2 p = transpose(ti) * Mat2::diag(1.0, c) * ti;
  return {p.a11(), 0.5 * (p.a12() + p.a21()), p.a22(), false};
}

struct WitnessBudget {
  int grid_points{1001};
  int random_samples{10000};
  std::uint64_t seed{0x5eed5eedULL};
};

/// Solves A^T P + P A = -I for symmetric P (3x3 system, Cramer's rule).
inline QuadraticForm lyapunov_solve(const Mat2& a) {
  // Unknowns (p, q, r) of P = [[p, q], [q, r]].
  const double m[3][3] = {{2.0 * a.a11(), 2.0 * a.a21(), 0.0},
                          {a.a12(), a.a11() + a.a22(), a.a21()},
                          {0.0, 2.0 * a.a12(), 2.0 * a.a22()}};
  const double rhs[3] = {-1.0, 0.0, -1.0};
  auto det3 = [](const double x[3][3]) {
    return x[0][0] * (x[1][1] * x[2][2] - x[1][2] * x[2][1]) - x[0][1] * (x[1][0] * x[2][2] - x[1][2] * x[2][0]) +
           x[0][2] * (x[1][0] * x[2][1] - x[1][1] * x[2][0]);
  };
  const double d = det3(m);
  if (d == 0.0) throw Error(ErrorCode::degenerate_basis, "Lyapunov equation is singular");
  double sol[3];
  for (int j = 0; j < 3; ++j) {
    double mj[3][3];
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) mj[r][c] = c == j ? rhs[r] : m[r][c];
    }
    sol[j] = det3(mj) / d;
  }
  return {sol[0], sol[1], sol[2], false};
}

namespace detail {

// Worst normalized Lie-derivative eigenvalue over the pair; negative means a strict certificate.
inline double certificate_score(const QuadraticForm& v, const Mat2& a1, const Mat2& a2) {
  const double pn = norm(v.matrix());
  return std::max(lie_derivative_max_eigenvalue(a1, v) / (pn * norm(a1)),
                  lie_derivative_max_eigenvalue(a2, v) / (pn * norm(a2)));
}

}  // namespace detail

/// Numeric strict common quadratic LF for a pair that has one.
///
/// Scans P(l) = l P1 + (1 - l) P2 on a uniform grid, P_i solving A_i^T P_i + P_i A_i = -I, and
/// keeps the best-scoring member; falls back to seeded rejection sampling over
/// P = R(theta) diag(1, e^s) R(theta)^T.
inline QuadraticForm quadratic_clf_witness(const Mat2& a1, const Mat2& a2, const WitnessBudget& budget = {}) {
  if (!is_hurwitz(a1) || !is_hurwitz(a2) || !has_quadratic_clf(a1, a2)) {
    throw Error(ErrorCode::precondition, "witness search needs a pair satisfying the S1 inequalities");
  }
  const QuadraticForm p1 = lyapunov_solve(a1);
  const QuadraticForm p2 = lyapunov_solve(a2);
  QuadraticForm best;
  double best_score = std::numeric_limits<double>::infinity();
  const int n = std::max(2, budget.grid_points);
  for (int i = 0; i < n; ++i) {
    const double l = static_cast<double>(i) / (n - 1);
    const QuadraticForm cand{l * p1.p11 + (1 - l) * p2.p11, l * p1.p12 + (1 - l) * p2.p12,
                             l * p1.p22 + (1 - l) * p2.p22, true};
    const double score = detail::certificate_score(cand, a1, a2);
    if (score < best_score) {
      best_score = score;
      best = cand;
    }
  }
  if (certifies_strictly(best, a1, a2)) return best;

  std::mt19937_64 rng(budget.seed);
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (int i = 0; i < budget.random_samples; ++i) {
    const double theta = uniform() * 3.141592653589793;
    const double stretch = std::exp(24.0 * uniform() - 12.0);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const QuadraticForm cand{c * c + s * s * stretch, c * s * (1.0 - stretch), s * s + c * c * stretch, true};
    if (certifies_strictly(cand, a1, a2)) return cand;
  }
  throw Error(ErrorCode::witness_not_found,
              "no strict certificate after " + std::to_string(n) + " grid points and " +
                  std::to_string(budget.random_samples) + " samples");
}

}  // namespace swstab
