#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "swstab/error.hpp"
#include "swstab/invariants.hpp"
#include "swstab/lyapunov.hpp"
#include "swstab/mat2.hpp"
#include "swstab/normal_form.hpp"
#include "swstab/worst_traj.hpp"

namespace swstab {

enum class StabilityCase { s1_quadratic_lf, s2_unbounded, s3_marginal, s4_guas, s4_marginal, s4_unbounded };

inline std::string to_string(StabilityCase c) {
  switch (c) {
    case StabilityCase::s1_quadratic_lf: return "S1-quadratic-LF";
    case StabilityCase::s2_unbounded: return "S2-unbounded";
    case StabilityCase::s3_marginal: return "S3-marginal";
    case StabilityCase::s4_guas: return "S4-GUAS";
    case StabilityCase::s4_marginal: return "S4-marginal";
    case StabilityCase::s4_unbounded: return "S4-unbounded";
  }
  return "unknown";
}

inline bool is_s4(StabilityCase c) {
  return c == StabilityCase::s4_guas || c == StabilityCase::s4_marginal || c == StabilityCase::s4_unbounded;
}

/// Stable under every switching signal (GUAS or merely uniformly stable).
inline bool is_bounded(StabilityCase c) { return c != StabilityCase::s2_unbounded && c != StabilityCase::s4_unbounded; }

using Certificate = std::variant<std::monostate, QuadraticForm, UnstableDirection, WorstTrajectory>;

struct BoundaryFlag {
  std::string name;
  double distance{0.0};
  std::string detail;
};

struct Verdict {
  StabilityCase kind{StabilityCase::s1_quadratic_lf};
  InvariantSet invariants;
  Certificate certificate;
  std::vector<BoundaryFlag> flags;
  /// Numeric worst-trajectory return ratio (S4 only).
  std::optional<double> r_numeric;
  bool cross_check_failed{false};
  double s3_band_used{0.0};
  double r_band_used{0.0};

  [[nodiscard]] bool has_flag(const std::string& name) const {
    for (const auto& f : flags) {
      if (f.name == name) return true;
    }
    return false;
  }
};

struct ClassifyOptions {
  /// S3 when |Gamma + sqrt(det1 det2)| < s3_band (1 + det1 det2).
  double s3_band{1e-9};
  /// S4-marginal when |R - 1| < r_band.
  double r_band{1e-9};
  /// Relative analytic/numeric R disagreement that raises a cross-check failure.
  double cross_check_tol{1e-4};
  /// Relative distance to a region boundary below which a near-boundary flag is attached.
  double near_boundary{1e-6};
  bool search_witness{true};
  WitnessBudget witness{};
};

namespace detail {

inline void flag_if_near(Verdict& v, const char* name, double distance, double threshold) {
  if (std::abs(distance) < threshold) v.flags.push_back({name, distance, "near region boundary"});
}

}  // namespace detail

/// Decision procedure. Regions are tested in the order S3 band, S2, S1, S4; the S4
/// sub-case follows the analytic R, cross-checked against the numeric worst trajectory.
inline Verdict classify(const Mat2& a1, const Mat2& a2, const ClassifyOptions& opts = {}) {
  if (!is_hurwitz(a1) || !is_hurwitz(a2)) throw Error(ErrorCode::not_hurwitz, "both matrices must be Hurwitz");
  Verdict v;
  v.invariants = compute_invariants(a1, a2);
  v.s3_band_used = opts.s3_band;
  v.r_band_used = opts.r_band;
  InvariantSet& inv = v.invariants;
  const double dd = inv.det1 * inv.det2;
  const double root = inv.geo_mean_det;
  const double scale = 1.0 + dd;
  const double gamma_margin = (inv.gamma + root) / scale;
  const double tr_margin = (inv.tr12 + 2.0 * root) / scale;

  if (std::abs(inv.gamma + root) < opts.s3_band * scale) {
    v.kind = StabilityCase::s3_marginal;
    try {
      v.certificate = nonstrict_clf_s3(normalize(a1, a2), std::max(1e-6, opts.s3_band));
    } catch (const Error& e) {
      v.flags.push_back({"no-certificate", 0.0, e.what()});
    }
    return v;
  }
  if (inv.gamma < -root) {
    v.kind = StabilityCase::s2_unbounded;
    v.certificate = unstable_direction(a1, a2);
    detail::flag_if_near(v, "near-S3", gamma_margin, opts.near_boundary);
    return v;
  }
  if (inv.tr12 > -2.0 * root) {
    v.kind = StabilityCase::s1_quadratic_lf;
    detail::flag_if_near(v, "near-S3", gamma_margin, opts.near_boundary);
    detail::flag_if_near(v, "near-S4", tr_margin, opts.near_boundary);
    if (opts.search_witness) {
      try {
        v.certificate = quadratic_clf_witness(a1, a2, opts.witness);
      } catch (const Error& e) {
        v.flags.push_back({"witness-not-found", 0.0, e.what()});
      }
    }
    return v;
  }

  complete_s4(inv);
  const double r = *inv.r_value;
  if (std::abs(r - 1.0) < opts.r_band) {
    v.kind = StabilityCase::s4_marginal;
  } else {
    v.kind = r < 1.0 ? StabilityCase::s4_guas : StabilityCase::s4_unbounded;
  }
  detail::flag_if_near(v, "near-S1", tr_margin, opts.near_boundary);
  detail::flag_if_near(v, "near-R-1", r - 1.0, opts.near_boundary);
  try {
    WorstTrajectory wt = worst_trajectory(a1, a2, default_start(a1, a2), 1);
    v.r_numeric = wt.return_ratio;
    const double rel = std::abs(wt.return_ratio - r) / r;
    if (rel > opts.cross_check_tol) {
      v.cross_check_failed = true;
      v.flags.push_back({"CrossCheckFailure", rel, "analytic and numeric R disagree"});
    }
    v.certificate = std::move(wt);
  } catch (const Error& e) {
    v.cross_check_failed = true;
    v.flags.push_back({"CrossCheckFailure", 0.0, e.what()});
  }
  return v;
}

struct Explanation {
  std::string rule;
  std::vector<std::pair<std::string, double>> quantities;
  std::string certificate;

  [[nodiscard]] std::string text() const {
    std::string out = rule + "\n";
    char buf[128];
    for (const auto& [name, value] : quantities) {
      std::snprintf(buf, sizeof buf, "  %-22s % .12g\n", name.c_str(), value);
      out += buf;
    }
    out += "  certificate: " + certificate + "\n";
    return out;
  }
};

inline Explanation explain(const Verdict& v) {
  const InvariantSet& inv = v.invariants;
  const double root = inv.geo_mean_det;
  Explanation e;
  e.quantities = {{"gamma", inv.gamma}, {"sqrt(det1 det2)", root}, {"tr(A1 A2)", inv.tr12}};
  switch (v.kind) {
    case StabilityCase::s1_quadratic_lf:
      e.rule = "S1: Gamma > -sqrt(det1 det2) and tr(A1 A2) > -2 sqrt(det1 det2)";
      e.quantities.emplace_back("gamma margin", inv.gamma + root);
      e.quantities.emplace_back("tr(A1 A2) margin", inv.tr12 + 2.0 * root);
      break;
    case StabilityCase::s2_unbounded:
      e.rule = "S2: Gamma < -sqrt(det1 det2)";
      e.quantities.emplace_back("gamma margin", inv.gamma + root);
      break;
    case StabilityCase::s3_marginal:
      e.rule = "S3: Gamma = -sqrt(det1 det2) within the band";
      e.quantities.emplace_back("gamma + sqrt(det1 det2)", inv.gamma + root);
      e.quantities.emplace_back("band", v.s3_band_used * (1.0 + inv.det1 * inv.det2));
      break;
    default:
      e.rule = "S4: Gamma > sqrt(det1 det2) and tr(A1 A2) <= -2 sqrt(det1 det2); " + to_string(v.kind);
      if (inv.r_value) e.quantities.emplace_back("R analytic", *inv.r_value);
      if (v.r_numeric) e.quantities.emplace_back("R numeric", *v.r_numeric);
      if (inv.t1) e.quantities.emplace_back("t1", *inv.t1);
      if (inv.t2) e.quantities.emplace_back("t2", *inv.t2);
      e.quantities.emplace_back("R band", v.r_band_used);
      break;
  }
  if (std::holds_alternative<QuadraticForm>(v.certificate)) {
    const auto& q = std::get<QuadraticForm>(v.certificate);
    e.certificate = std::string(q.strict ? "strict" : "nonstrict") + " quadratic LF";
  } else if (std::holds_alternative<UnstableDirection>(v.certificate)) {
    e.certificate = "unstable direction of the averaged matrix";
  } else if (std::holds_alternative<WorstTrajectory>(v.certificate)) {
    e.certificate = "worst trajectory";
  } else {
    e.certificate = "none";
  }
  return e;
}

}  // namespace swstab
