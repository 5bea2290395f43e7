#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "swstab/error.hpp"
#include "swstab/invariants.hpp"
#include "swstab/lyapunov.hpp"
#include "swstab/mat2.hpp"
#include "swstab/simulate.hpp"

namespace swstab {

/// The locus Q(x) = det(A1 x, A2 x) = q1 x1^2 + q2 x1 x2 + q3 x2^2 = 0, two lines D1, D2 when
/// Delta > 0.
struct ParallelSet {
  std::array<double, 3> q_coeffs{};
  std::array<Vec2, 2> directions{};
  /// Slopes of D1, D2; empty for a vertical line.
  std::optional<double> m1;
  std::optional<double> m2;
  /// A2 v = alpha_i A1 v on D_i.
  std::array<double, 2> alphas{};
  bool direct{false};
  /// Rotation sense of both fields on the set: +1 counterclockwise, -1 clockwise.
  int rotation{0};
  /// Field (1 or 2) the worst trajectory follows when leaving D_i in the rotation sense.
  std::array<int, 2> departing_field{};
};

inline std::array<double, 3> q_coefficients(const Mat2& a1, const Mat2& a2) {
  const double a = a1.a11(), b = a1.a12(), c = a1.a21(), d = a1.a22();
  const double e = a2.a11(), f = a2.a12(), g = a2.a21(), h = a2.a22();
  return {a * g - c * e, a * h + b * g - c * f - d * e, b * h - d * f};
}

inline double q_value(const std::array<double, 3>& q, const Vec2& x) {
  return q[0] * x.x1 * x.x1 + q[1] * x.x1 * x.x2 + q[2] * x.x2 * x.x2;
}

namespace detail {

// Angular distance from ray r0 to ray r in the given sense, in [0, 2 pi).
inline double ray_gap(const Vec2& r0, const Vec2& r, int sense) { return angle_from_radial(r0, r, sense); }

inline Vec2 rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x1 - s * v.x2, s * v.x1 + c * v.x2};
}

// The next ray of the parallel set met from r0 rotating in `sense`, excluding r0's own line.
inline Vec2 next_ray(const Vec2& r0, const std::array<Vec2, 2>& dirs, int sense) {
  Vec2 best{};
  double best_gap = 10.0;
  for (const Vec2& d : dirs) {
    for (double sgn : {1.0, -1.0}) {
      const Vec2 r = sgn * d;
      const double gap = ray_gap(r0, r, sense);
      if (gap > 1e-9 && gap < best_gap) {
        best_gap = gap;
        best = r;
      }
    }
  }
  return best;
}

inline int sector_field(const Mat2& a1, const Mat2& a2, const Vec2& r0, const Vec2& r1, int sense) {
  const Vec2 mid = rotate(r0, 0.5 * sense * ray_gap(r0, r1, sense));
  return angle_from_radial(mid, a1 * mid, sense) <= angle_from_radial(mid, a2 * mid, sense) ? 1 : 2;
}

}  // namespace detail

inline ParallelSet parallel_set(const Mat2& a1, const Mat2& a2) {
  const double bd = big_delta(a1, a2);
  if (!(bd > 0.0)) throw Error(ErrorCode::delta_non_positive, "parallel set is not a pair of lines (Delta <= 0)");
  ParallelSet ps;
  ps.q_coeffs = q_coefficients(a1, a2);
  const auto [q1, q2, q3] = ps.q_coeffs;
  const SymmetricEigen se = symmetric_eigen(q1, 0.5 * q2, q3);
  const double wp = std::sqrt(std::max(0.0, -se.lo));
  const double wm = std::sqrt(std::max(0.0, se.hi));
  for (int i = 0; i < 2; ++i) {
    const double sgn = i == 0 ? 1.0 : -1.0;
    Vec2 v = wp * se.v_hi + sgn * wm * se.v_lo;
    ps.directions[static_cast<std::size_t>(i)] = canonical_direction((1.0 / norm(v)) * v);
  }
  for (int i = 0; i < 2; ++i) {
    const Vec2 v = ps.directions[static_cast<std::size_t>(i)];
    const Vec2 w1 = a1 * v;
    ps.alphas[static_cast<std::size_t>(i)] = dot(a2 * v, w1) / dot(w1, w1);
  }
  ps.direct = ps.alphas[0] > 0.0 && ps.alphas[1] > 0.0;

  const Vec2 v0 = ps.directions[0];
  const double turn = cross(v0, a1 * v0);
  ps.rotation = turn > 0.0 ? 1 : (turn < 0.0 ? -1 : 0);
  if (ps.rotation != 0) {
    for (std::size_t i = 0; i < 2; ++i) {
      const Vec2 r0 = ps.directions[i];
      ps.departing_field[i] = detail::sector_field(a1, a2, r0, detail::next_ray(r0, ps.directions, ps.rotation),
                                                   ps.rotation);
    }
    // Label D1 as the line the A2-arcs leave from.
    if (ps.departing_field[0] != 2 && ps.departing_field[1] == 2) {
      std::swap(ps.directions[0], ps.directions[1]);
      std::swap(ps.alphas[0], ps.alphas[1]);
      std::swap(ps.departing_field[0], ps.departing_field[1]);
    }
  }
  auto slope = [](const Vec2& v) -> std::optional<double> {
    if (std::abs(v.x1) <= 1e-15 * std::abs(v.x2)) return std::nullopt;
    return v.x2 / v.x1;
  };
  ps.m1 = slope(ps.directions[0]);
  ps.m2 = slope(ps.directions[1]);
  return ps;
}

/// True iff both eigenvalues of A2 A1^{-1} are positive, i.e. A1 x and A2 x point the same way on the set.
inline bool is_direct(const ParallelSet& ps, const Mat2& a1, const Mat2& a2) {
  if (!(big_delta(a1, a2) > 0.0)) return false;
  return ps.alphas[0] > 0.0 && ps.alphas[1] > 0.0;
}

struct Arc {
  int field{1};
  double duration{0.0};
  Vec2 start;
};

struct WorstTrajectory {
  std::vector<Arc> arcs;
  Vec2 start;
  Vec2 end;
  /// |x after one revolution| / |x0|.
  double return_ratio{1.0};
  /// |x after all revolutions| / |x0|.
  double final_ratio{1.0};
  int rotation{0};
};

struct CrossingOptions {
  double step_factor{0.01};
  long max_steps{1000000};
  double bisection_tol{1e-14};
};

/// Smallest t > 0 with <n, expm(a, t) x> = 0: march, bisect, one Newton polish.
inline double first_crossing(const Mat2& a, const Vec2& x, const Vec2& n, const CrossingOptions& opts = {}) {
  auto g = [&](double t) { return dot(n, expm(a, t) * x); };
  const double h = opts.step_factor / std::max(norm(a), 1e-300);
  double lo = 0.0;
  double glo = g(0.0);
  double hi = 0.0;
  bool bracketed = false;
  for (long k = 1; k <= opts.max_steps; ++k) {
    hi = static_cast<double>(k) * h;
    const double ghi = g(hi);
    if (ghi == 0.0 || (ghi > 0.0) != (glo > 0.0)) {
      bracketed = true;
      break;
    }
    lo = hi;
    glo = ghi;
  }
  if (!bracketed) throw Error(ErrorCode::no_crossing, "flow did not reach the target line within the time bound");
  while (hi - lo > opts.bisection_tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) {
      lo = hi = mid;
      break;
    }
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double t = 0.5 * (lo + hi);
  const Vec2 xt = expm(a, t) * x;
  const double slope = dot(n, a * xt);
  if (slope != 0.0) {
    const double polished = t - dot(n, xt) / slope;
    if (polished >= lo - opts.bisection_tol && polished <= hi + opts.bisection_tol) t = polished;
  }
  return t;
}

inline bool on_parallel_set(const Mat2& a1, const Mat2& a2, const Vec2& x, double rel_tol = 1e-8) {
  const auto q = q_coefficients(a1, a2);
  const SymmetricEigen se = symmetric_eigen(q[0], 0.5 * q[1], q[2]);
  const double scale = std::max(std::abs(se.hi), std::abs(se.lo)) * dot(x, x);
  return std::abs(q_value(q, x)) <= rel_tol * scale;
}

/// A unit start point on D1, where the worst trajectory begins an A2-arc.
inline Vec2 default_start(const Mat2& a1, const Mat2& a2) { return parallel_set(a1, a2).directions[0]; }

/// The worst trajectory from x0 on the parallel set, as `revolutions` pairs of arcs. Each arc
/// follows the field making the smallest angle with the outward radial in the rotation sense
/// until it meets the next line of the set.
inline WorstTrajectory worst_trajectory(const Mat2& a1, const Mat2& a2, const Vec2& x0, int revolutions,
                                        const CrossingOptions& opts = {}) {
  if (!is_hurwitz(a1) || !is_hurwitz(a2)) throw Error(ErrorCode::not_hurwitz, "worst trajectory needs Hurwitz matrices");
  if (!s4_conditions(compute_invariants(a1, a2))) {
    throw Error(ErrorCode::precondition, "the worst trajectory is defined only under the S4 inequalities");
  }
  if (revolutions < 1) throw Error(ErrorCode::invalid_input, "revolutions must be positive");
  if (norm(x0) == 0.0 || !on_parallel_set(a1, a2, x0)) {
    throw Error(ErrorCode::precondition, "start point must be a nonzero point of the parallel set");
  }
  const ParallelSet ps = parallel_set(a1, a2);
  WorstTrajectory wt;
  wt.start = x0;
  wt.rotation = ps.rotation;
  const double x0_norm = norm(x0);
  Vec2 x = x0;
  for (int k = 0; k < 2 * revolutions; ++k) {
    const Vec2 r0 = (1.0 / norm(x)) * x;
    const Vec2 r1 = detail::next_ray(r0, ps.directions, ps.rotation);
    const int field = detail::sector_field(a1, a2, r0, r1, ps.rotation);
    const Mat2& a = field == 1 ? a1 : a2;
    const Vec2 n{-r1.x2, r1.x1};
    const double t = first_crossing(a, x, n, opts);
    const Vec2 next = expm(a, t) * x;
    if (dot(next, r1) <= 0.0) throw Error(ErrorCode::no_crossing, "arc crossed the opposite ray of the target line");
    wt.arcs.push_back({field, t, x});
    x = next;
    if (k == 1) wt.return_ratio = norm(x) / x0_norm;
  }
  wt.end = x;
  wt.final_ratio = norm(x) / x0_norm;
  return wt;
}

/// Control signal reproducing the arcs of a worst trajectory.
inline SwitchingSignal switching_signal(const WorstTrajectory& wt) {
  SwitchingSignal s{{}, {}};
  double t = 0.0;
  for (const Arc& arc : wt.arcs) {
    s.breakpoints.push_back(t);
    s.values.push_back(arc.field == 1 ? 1.0 : 0.0);
    t += arc.duration;
  }
  return s;
}

inline double total_duration(const WorstTrajectory& wt) {
  double t = 0.0;
  for (const Arc& arc : wt.arcs) t += arc.duration;
  return t;
}

struct UnstableDirection {
  double sigma0{0.0};
  Vec2 direction;
  double eigenvalue{0.0};
};

/// sigma0 A1 + (1 - sigma0) A2 has determinant phi(sigma0) < 0 in case S2, hence a positive
/// real eigenvalue; its eigenvector grows under the convexified system.
inline UnstableDirection unstable_direction(const Mat2& a1, const Mat2& a2) {
  const double root = std::sqrt(std::max(0.0, det(a1) * det(a2)));
  if (!(det(a1) > 0.0 && det(a2) > 0.0 && gamma(a1, a2) < -root)) {
    throw Error(ErrorCode::wrong_case, "unstable direction needs Gamma < -sqrt(det1 det2)");
  }
  const SigmaPolys sp = sigma_polys(a1, a2);
  if (!sp.sigma0) throw Error(ErrorCode::wrong_case, "phi has no interior minimizer");
  const double s0 = *sp.sigma0;
  const EigenStructure es = eigen(mixed_field(a1, a2, s0));
  if (es.kind != EigenKind::real_distinct || !(es.values[0].real() > 0.0)) {
    throw Error(ErrorCode::wrong_case, "averaged matrix has no positive eigenvalue");
  }
  return {s0, es.vectors[0], es.values[0].real()};
}

}  // namespace swstab
