#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include "swstab/error.hpp"
#include "swstab/mat2.hpp"

namespace swstab {

/// Gamma(X, Y) = (tr X tr Y - tr(XY)) / 2. Gamma(X, X) = det X.
inline double gamma(const Mat2& x, const Mat2& y) { return 0.5 * (trace(x) * trace(y) - trace(x * y)); }

/// 4 (Gamma(A1, A2)^2 - det A1 det A2); also the discriminant of Q(x) = det(A1 x, A2 x).
inline double big_delta(const Mat2& a1, const Mat2& a2) {
  const double g = gamma(a1, a2);
  return 4.0 * (g * g - det(a1) * det(a2));
}

/// The normalized traces (tau1, tau2).
///
/// Each trace is divided by sqrt|delta| of its own matrix when both discriminants are
/// nonzero, by sqrt|delta| of the nondegenerate one when exactly one vanishes, and by 2
/// when both vanish. Zero is decided with discriminant_sign().
inline std::pair<double, double> taus(const Mat2& a1, const Mat2& a2) {
  const int s1 = discriminant_sign(a1);
  const int s2 = discriminant_sign(a2);
  const double t1 = trace(a1);
  const double t2 = trace(a2);
  if (s1 != 0 && s2 != 0) {
    return {t1 / std::sqrt(std::abs(discriminant(a1))), t2 / std::sqrt(std::abs(discriminant(a2)))};
  }
  if (s1 == 0 && s2 == 0) return {0.5 * t1, 0.5 * t2};
  const double root = std::sqrt(std::abs(s1 != 0 ? discriminant(a1) : discriminant(a2)));
  return {t1 / root, t2 / root};
}

inline double kappa(const Mat2& a1, const Mat2& a2) {
  const double t1 = trace(a1);
  const double t2 = trace(a2);
  if (t1 == 0.0 || t2 == 0.0) throw Error(ErrorCode::trace_zero, "kappa needs nonzero traces");
  const auto [tau1, tau2] = taus(a1, a2);
  return 2.0 * tau1 * tau2 / (t1 * t2) * (trace(a1 * a2) - 0.5 * t1 * t2);
}

/// Every coordinate-invariant scalar of a pair. t1, t2 and r_value are only filled once the
/// pair is known to satisfy the S4 inequalities.
struct InvariantSet {
  double gamma{0.0};
  double delta1{0.0};
  double delta2{0.0};
  int delta_sign1{0};
  int delta_sign2{0};
  double tau1{0.0};
  double tau2{0.0};
  double kappa{0.0};
  double big_delta{0.0};
  double det1{0.0};
  double det2{0.0};
  double tr1{0.0};
  double tr2{0.0};
  double tr12{0.0};
  double geo_mean_det{0.0};
  std::optional<double> t1;
  std::optional<double> t2;
  std::optional<double> r_value;

  /// alpha_i with tau_i = tr(A_i) / (2 alpha_i): the rescaling that brings A_i to its normal
  /// form. Normalized time on arc i equals alpha_i times the original time.
  [[nodiscard]] double time_scale(int i) const { return i == 1 ? tr1 / (2.0 * tau1) : tr2 / (2.0 * tau2); }
};

inline InvariantSet compute_invariants(const Mat2& a1, const Mat2& a2) {
  InvariantSet inv;
  inv.det1 = det(a1);
  inv.det2 = det(a2);
  inv.tr1 = trace(a1);
  inv.tr2 = trace(a2);
  inv.tr12 = trace(a1 * a2);
  inv.gamma = 0.5 * (inv.tr1 * inv.tr2 - inv.tr12);
  inv.delta1 = discriminant(a1);
  inv.delta2 = discriminant(a2);
  inv.delta_sign1 = discriminant_sign(a1);
  inv.delta_sign2 = discriminant_sign(a2);
  std::tie(inv.tau1, inv.tau2) = taus(a1, a2);
  if (inv.tr1 != 0.0 && inv.tr2 != 0.0) {
    inv.kappa = 2.0 * inv.tau1 * inv.tau2 / (inv.tr1 * inv.tr2) * (inv.tr12 - 0.5 * inv.tr1 * inv.tr2);
  }
  inv.big_delta = 4.0 * (inv.gamma * inv.gamma - inv.det1 * inv.det2);
  inv.geo_mean_det = inv.det1 * inv.det2 > 0.0 ? std::sqrt(inv.det1 * inv.det2) : 0.0;
  return inv;
}

/// Gamma > sqrt(det1 det2) and tr(A1 A2) <= -2 sqrt(det1 det2).
inline bool s4_conditions(const InvariantSet& inv) {
  return inv.det1 > 0.0 && inv.det2 > 0.0 && inv.gamma > inv.geo_mean_det &&
         inv.tr12 <= -2.0 * inv.geo_mean_det;
}

namespace detail {

inline double checked_atanh(double x) {
  if (!(x > -1.0 && x < 1.0)) {
    throw Error(ErrorCode::domain_error, "arctanh argument " + std::to_string(x) + " outside (-1, 1)");
  }
  return 0.5 * std::log((1.0 + x) / (1.0 - x));
}

}  // namespace detail

/// Normalized durations (t1, t2) of the A1- and A2-arcs of the worst trajectory.
///
/// delta_i < 0: pi/2 - arctan(tr1 tr2 (k tau_i + tau_j) / (2 tau1 tau2 sqrt(Delta)))
/// delta_i > 0: arctanh(2 tau1 tau2 sqrt(Delta) / (tr1 tr2 (k tau_i - tau_j)))
/// delta_i = 0: sqrt(Delta) / ((tr(A1 A2) - tr1 tr2 / 2) tau_i)
inline std::pair<double, double> switch_times(const InvariantSet& inv, std::pair<int, int> delta_signs) {
  if (!(inv.big_delta > 0.0)) throw Error(ErrorCode::precondition, "switch times need Delta > 0");
  if (inv.tr1 == 0.0 || inv.tr2 == 0.0) throw Error(ErrorCode::trace_zero, "switch times need nonzero traces");
  const double root_delta = std::sqrt(inv.big_delta);
  const double tr_prod = inv.tr1 * inv.tr2;
  const double tau_prod = inv.tau1 * inv.tau2;
  const double taus_arr[2] = {inv.tau1, inv.tau2};
  const int signs[2] = {delta_signs.first, delta_signs.second};
  double out[2] = {0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const double tau_i = taus_arr[i];
    const double tau_j = taus_arr[1 - i];
    if (signs[i] < 0) {
      out[i] = std::numbers::pi / 2.0 -
               std::atan(tr_prod * (inv.kappa * tau_i + tau_j) / (2.0 * tau_prod * root_delta));
    } else if (signs[i] > 0) {
      out[i] = detail::checked_atanh(2.0 * tau_prod * root_delta / (tr_prod * (inv.kappa * tau_i - tau_j)));
    } else {
      out[i] = root_delta / ((inv.tr12 - 0.5 * tr_prod) * tau_i);
    }
  }
  return {out[0], out[1]};
}

/// Fills t1, t2 and r_value on an invariant set that satisfies the S4 inequalities.
inline void complete_s4(InvariantSet& inv) {
  if (!s4_conditions(inv)) throw Error(ErrorCode::precondition, "R is defined only under the S4 inequalities");
  const auto [t1, t2] = switch_times(inv, {inv.delta_sign1, inv.delta_sign2});
  inv.t1 = t1;
  inv.t2 = t2;
  inv.r_value = (2.0 * inv.gamma + std::sqrt(inv.big_delta)) / (2.0 * inv.geo_mean_det) *
                std::exp(inv.tau1 * t1 + inv.tau2 * t2);
}

/// The one-revolution return ratio R of the worst trajectory (S4 pairs only).
inline double r_value(const Mat2& a1, const Mat2& a2) {
  InvariantSet inv = compute_invariants(a1, a2);
  complete_s4(inv);
  return *inv.r_value;
}

}  // namespace swstab
