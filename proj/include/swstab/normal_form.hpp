#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "swstab/error.hpp"
#include "swstab/invariants.hpp"
#include "swstab/mat2.hpp"

namespace swstab {

enum class NormalFormCase { c1a, c1b, c2, c3_rot, c3_real, c3_defective };

inline std::string to_string(NormalFormCase c) {
  switch (c) {
    case NormalFormCase::c1a: return "1a";
    case NormalFormCase::c1b: return "1b";
    case NormalFormCase::c2: return "2";
    case NormalFormCase::c3_rot: return "3-rot";
    case NormalFormCase::c3_real: return "3-real";
    case NormalFormCase::c3_defective: return "3-defective";
  }
  return "unknown";
}

/// A pair reduced by a change of basis T and positive time rescalings:
/// b_i = (1 / alpha_i) T^{-1} A_{sigma(i)} T, sigma the identity unless `swapped`.
struct NormalFormResult {
  NormalFormCase case_tag{NormalFormCase::c1a};
  Mat2 b1;
  Mat2 b2;
  Mat2 t{Mat2::identity()};
  double alpha1{1.0};
  double alpha2{1.0};
  std::optional<double> f;
  bool swapped{false};
  /// Discriminant signs of b1, b2.
  int sign1{0};
  int sign2{0};
  std::string note;
};

/// Tolerance for zero / rank tests on [A1, A2]; the commutator is bilinear in the pair.
inline double commutator_tolerance(const Mat2& a1, const Mat2& a2) { return 1e-9 * norm(a1) * norm(a2); }

namespace detail {

inline Mat2 similar(const Mat2& t, const Mat2& a, double alpha) { return (1.0 / alpha) * (inverse(t) * a * t); }

inline Mat2 swap_columns(const Mat2& m) { return Mat2::from_columns(m.col(1), m.col(0)); }

// Case det[A1, A2] < 0. In an eigenbasis of the commutator both traceless parts are
// anti-diagonal, so a dilation of the second axis fixes the (1,2) entry of b1 to 1.
// The basis order selects between the two roots F and sign(d1 d2)/F.
inline NormalFormResult reduce_negative_commutator(const Mat2& a1, const Mat2& a2, const InvariantSet& inv) {
  const Mat2 c = commutator(a1, a2);
  const EigenStructure ec = eigen(c, 0.0);
  if (ec.kind != EigenKind::real_distinct) {
    throw Error(ErrorCode::degenerate_basis, "commutator with negative determinant is not diagonalizable");
  }
  const Mat2 n1 = traceless_part(a1);
  const Mat2 n2 = traceless_part(a2);
  const double alpha1 = inv.time_scale(1);
  const double alpha2 = inv.time_scale(2);

  struct Candidate {
    Mat2 basis;
    double q1, r1, q2, r2, f;
  };
  auto make = [&](const Mat2& basis) {
    const Mat2 bi = inverse(basis);
    const Mat2 m1 = bi * n1 * basis;
    const Mat2 m2 = bi * n2 * basis;
    return Candidate{basis, m1.a12(), m1.a21(), m2.a12(), m2.a21(), m2.a21() * m1.a12() / (alpha1 * alpha2)};
  };
  const Mat2 base = Mat2::from_columns(ec.vectors[0], ec.vectors[1]);
  const Candidate first = make(base);
  const Candidate second = make(swap_columns(base));

  const Candidate* pick = &first;
  if (inv.delta_sign1 == 0) {
    if (std::abs(second.q1) > std::abs(first.q1)) pick = &second;
  } else if (inv.delta_sign2 == 0) {
    if (std::abs(second.q2) < std::abs(first.q2)) pick = &second;
  } else if (std::abs(second.f) > std::abs(first.f)) {
    pick = &second;
  }
  if (std::abs(pick->q1) <= 1e-14 * std::max(1.0, norm(n1))) {
    throw Error(ErrorCode::degenerate_basis, "off-diagonal entry of A1 in the commutator basis vanishes");
  }
  const Mat2 t = pick->basis * Mat2::diag(1.0, alpha1 / pick->q1);

  NormalFormResult res;
  res.case_tag = NormalFormCase::c1a;
  res.t = t;
  res.alpha1 = alpha1;
  res.alpha2 = alpha2;
  res.b1 = similar(t, a1, alpha1);
  res.b2 = similar(t, a2, alpha2);
  res.f = res.b2.a21();
  res.sign1 = inv.delta_sign1;
  res.sign2 = inv.delta_sign2;
  return res;
}

// Case det[A1, A2] > 0: A1 diagonalized with its larger eigenvalue first, then
// U = diag(1, d) [[1, 1], [1, -1]] makes both traceless parts symmetric.
inline NormalFormResult reduce_positive_commutator(const Mat2& a1, const Mat2& a2, const InvariantSet& inv) {
  if (inv.delta_sign1 <= 0 || inv.delta_sign2 <= 0) {
    throw Error(ErrorCode::degenerate_basis, "det[A1,A2] > 0 requires both discriminants positive");
  }
  const EigenStructure e1 = eigen(a1);
  const Mat2 p = Mat2::from_columns(e1.vectors[0], e1.vectors[1]);
  const Mat2 m2 = inverse(p) * traceless_part(a2) * p;
  const double bc = m2.a12() * m2.a21();
  if (!(bc > 0.0)) {
    throw Error(ErrorCode::degenerate_basis, "b*c = " + std::to_string(bc) + " must be positive");
  }
  const double dilation = std::sqrt(bc) / m2.a12();
  const Mat2 t = p * Mat2::diag(1.0, dilation) * Mat2{1.0, 1.0, 1.0, -1.0};

  NormalFormResult res;
  res.case_tag = NormalFormCase::c1b;
  res.t = t;
  res.alpha1 = inv.time_scale(1);
  res.alpha2 = inv.time_scale(2);
  res.b1 = similar(t, a1, res.alpha1);
  res.b2 = similar(t, a2, res.alpha2);
  res.sign1 = inv.delta_sign1;
  res.sign2 = inv.delta_sign2;
  return res;
}

// Rank-one commutator: the kernel of [A1, A2] is a common eigenvector v. The matrix with
// positive discriminant is diagonalized on (v, w); the other becomes upper triangular.
inline NormalFormResult reduce_rank_one(const Mat2& a1, const Mat2& a2, const InvariantSet& inv) {
  const Vec2 v = kernel_direction(commutator(a1, a2));
  const bool swap = !(inv.delta_sign1 > 0);
  if (swap && !(inv.delta_sign2 > 0)) {
    throw Error(ErrorCode::degenerate_basis, "rank-one commutator but neither matrix has real distinct eigenvalues");
  }
  const Mat2& d = swap ? a2 : a1;
  const Mat2& o = swap ? a1 : a2;
  const double lambda_v = dot(v, d * v);
  const double lambda_w = trace(d) - lambda_v;
  const Vec2 w = kernel_direction(d - lambda_w * Mat2::identity());
  const Mat2 t = Mat2::from_columns(v, w);
  if (std::abs(det(t)) < 1e-12) throw Error(ErrorCode::degenerate_basis, "eigenvectors are parallel");

  NormalFormResult res;
  res.case_tag = NormalFormCase::c2;
  res.swapped = swap;
  res.t = t;
  res.alpha1 = swap ? inv.time_scale(2) : inv.time_scale(1);
  res.alpha2 = swap ? inv.time_scale(1) : inv.time_scale(2);
  res.b1 = similar(t, d, res.alpha1);
  res.b2 = similar(t, o, res.alpha2);
  res.sign1 = swap ? inv.delta_sign2 : inv.delta_sign1;
  res.sign2 = swap ? inv.delta_sign1 : inv.delta_sign2;
  res.note = "triangular pair, no canonical scaling";
  return res;
}

// Commuting pair. The traceless parts are proportional; the nonscalar one N with
// N^2 = s alpha^2 I is brought to alpha [[0, 1], [s, 0]] by T = [N e / alpha, e].
inline NormalFormResult reduce_commuting(const Mat2& a1, const Mat2& a2, const InvariantSet& inv) {
  const Mat2 n1 = traceless_part(a1);
  const Mat2 n2 = traceless_part(a2);
  const double scalar_tol = 1e-9 * std::max(1.0, std::max(norm(a1), norm(a2)));
  const bool scalar1 = norm(n1) <= scalar_tol;
  const bool scalar2 = norm(n2) <= scalar_tol;

  NormalFormResult res;
  res.alpha1 = inv.time_scale(1);
  res.alpha2 = inv.time_scale(2);
  res.sign1 = inv.delta_sign1;
  res.sign2 = inv.delta_sign2;
  int s = 0;
  if (scalar1 && scalar2) {
    res.t = Mat2::identity();
  } else {
    const bool ref_is_1 = !scalar1;
    const Mat2& n = ref_is_1 ? n1 : n2;
    const double alpha = ref_is_1 ? res.alpha1 : res.alpha2;
    s = ref_is_1 ? inv.delta_sign1 : inv.delta_sign2;
    Mat2 best = Mat2::identity();
    double best_det = -1.0;
    for (const Vec2 e : {Vec2{1.0, 0.0}, Vec2{0.0, 1.0}, Vec2{1.0, 1.0}, Vec2{1.0, -1.0}}) {
      const Mat2 cand = Mat2::from_columns((1.0 / alpha) * (n * e), e);
      const double d = std::abs(det(cand)) / (norm(cand.col(0)) * norm(cand.col(1)) + 1e-300);
      if (d > best_det) {
        best_det = d;
        best = cand;
      }
    }
    if (best_det < 1e-8) throw Error(ErrorCode::degenerate_basis, "no cyclic vector for the commuting pair");
    res.t = best;
  }
  res.b1 = similar(res.t, a1, res.alpha1);
  res.b2 = similar(res.t, a2, res.alpha2);
  res.case_tag = s < 0 ? NormalFormCase::c3_rot : (s > 0 ? NormalFormCase::c3_real : NormalFormCase::c3_defective);
  if (s != 0 && !scalar1 && !scalar2) res.f = res.b2.a21();
  return res;
}

}  // namespace detail

/// Reduces a Hurwitz pair to its normal form.
///
/// The case follows det[A1, A2] and the rank of the commutator, each tested against
/// commutator_tolerance(). The rescalings are alpha_i = tr(A_i) / (2 tau_i), so the
/// diagonal of b_i carries tau_i in every case.
inline NormalFormResult normalize(const Mat2& a1, const Mat2& a2) {
  if (!is_hurwitz(a1) || !is_hurwitz(a2)) throw Error(ErrorCode::not_hurwitz, "normal forms need Hurwitz matrices");
  const InvariantSet inv = compute_invariants(a1, a2);
  const Mat2 c = commutator(a1, a2);
  const double eps = commutator_tolerance(a1, a2);
  const double cn = norm(c);
  if (cn <= eps) return detail::reduce_commuting(a1, a2, inv);
  const double dc = det(c);
  if (std::abs(dc) <= eps * cn) return detail::reduce_rank_one(a1, a2, inv);
  if (dc < 0.0) return detail::reduce_negative_commutator(a1, a2, inv);
  return detail::reduce_positive_commutator(a1, a2, inv);
}

namespace detail {

inline bool close(double x, double y, double tol) { return std::abs(x - y) <= tol; }

inline bool close(const Mat2& x, const Mat2& y, double tol) {
  const double scale = tol * std::max(1.0, max_abs_entry(y));
  for (int i = 0; i < 4; ++i) {
    if (std::abs(x.entries()[static_cast<std::size_t>(i)] - y.entries()[static_cast<std::size_t>(i)]) > scale) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Checks the reconstruction b_i ~ T^{-1} A_{sigma(i)} T / alpha_i and the shape of the
/// normalized pair for its case tag, entrywise at `tol` relative to max(1, |entry|).
inline bool verify_normal_form(const NormalFormResult& res, const Mat2& a1, const Mat2& a2, double tol) {
  if (!(res.alpha1 > 0.0) || !(res.alpha2 > 0.0) || det(res.t) == 0.0) return false;
  const Mat2& x1 = res.swapped ? a2 : a1;
  const Mat2& x2 = res.swapped ? a1 : a2;
  if (!detail::close(detail::similar(res.t, x1, res.alpha1), res.b1, tol)) return false;
  if (!detail::close(detail::similar(res.t, x2, res.alpha2), res.b2, tol)) return false;

  const InvariantSet inv = compute_invariants(x1, x2);
  const double tau1 = inv.tau1;
  const double tau2 = inv.tau2;
  const double k = inv.kappa;
  const auto& b1 = res.b1;
  const auto& b2 = res.b2;
  auto rotation_form = [&](const Mat2& b, double tau, int s) {
    return detail::close(b, Mat2{tau, 1.0, static_cast<double>(s), tau}, tol);
  };
  auto upper = [&](const Mat2& b, double tau) {
    const double scale = tol * std::max(1.0, max_abs_entry(b));
    return std::abs(b.a21()) <= scale && detail::close(b.a11(), tau, scale) && detail::close(b.a22(), tau, scale);
  };

  switch (res.case_tag) {
    case NormalFormCase::c1a: {
      if (!res.f) return false;
      const double f = *res.f;
      const int s12 = res.sign1 * res.sign2;
      if (!rotation_form(b1, tau1, res.sign1)) return false;
      const double top = res.sign2 == 0 ? 0.0 : res.sign2 / f;
      if (!detail::close(b2, Mat2{tau2, top, f, tau2}, tol)) return false;
      if (s12 != 0 && std::abs(f) < 1.0 - tol) return false;
      return detail::close(f + s12 / f, 2.0 * k, tol * std::max(1.0, std::abs(k)));
    }
    case NormalFormCase::c1b: {
      if (res.sign1 <= 0 || res.sign2 <= 0 || !(std::abs(k) < 1.0)) return false;
      const double root = std::sqrt(1.0 - k * k);
      return rotation_form(b1, tau1, 1) && detail::close(b2, Mat2{tau2 + root, k, k, tau2 - root}, tol);
    }
    case NormalFormCase::c2: {
      const double scale = tol * std::max(1.0, max_abs_entry(b1));
      return std::abs(b1.a12()) <= scale && std::abs(b1.a21()) <= scale &&
             std::abs(b2.a21()) <= tol * std::max(1.0, max_abs_entry(b2));
    }
    case NormalFormCase::c3_rot:
    case NormalFormCase::c3_real: {
      const int s = res.case_tag == NormalFormCase::c3_rot ? -1 : 1;
      if (res.f) {
        const double f = *res.f;
        return detail::close(std::abs(f), 1.0, tol) && rotation_form(b1, tau1, s) &&
               detail::close(b2, Mat2{tau2, s / f, f, tau2}, tol) && detail::close(f, k, tol * std::max(1.0, std::abs(k)));
      }
      // One of the pair is scalar.
      const bool first_scalar = detail::close(b1, tau1 * Mat2::identity(), tol);
      const bool second_scalar = detail::close(b2, tau2 * Mat2::identity(), tol);
      return (first_scalar && (second_scalar || rotation_form(b2, tau2, s))) ||
             (second_scalar && rotation_form(b1, tau1, s));
    }
    case NormalFormCase::c3_defective:
      return upper(b1, tau1) && upper(b2, tau2);
  }
  return false;
}

}  // namespace swstab
