#pragma once

#include <cmath>
#include <locale>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "swstab/classify.hpp"
#include "swstab/error.hpp"
#include "swstab/invariants.hpp"
#include "swstab/mat2.hpp"
#include "swstab/normal_form.hpp"
#include "swstab/simulate.hpp"
#include "swstab/worst_traj.hpp"

namespace swstab::io {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

/// Accepts [[a11, a12], [a21, a22]] or the flat row-major [a11, a12, a21, a22].
inline Mat2 matrix_from_json(const json& j) {
  std::vector<double> e;
  auto number = [](const json& x) {
    if (!x.is_number()) throw Error(ErrorCode::invalid_input, "matrix entries must be numbers");
    return x.get<double>();
  };
  if (!j.is_array()) throw Error(ErrorCode::invalid_input, "matrix must be a JSON array");
  if (j.size() == 2 && j[0].is_array() && j[1].is_array()) {
    for (const auto& row : j) {
      if (row.size() != 2) throw Error(ErrorCode::invalid_input, "matrix rows must have two entries");
      for (const auto& x : row) e.push_back(number(x));
    }
  } else if (j.size() == 4) {
    for (const auto& x : j) e.push_back(number(x));
  } else {
    throw Error(ErrorCode::invalid_input, "matrix must have exactly 4 entries");
  }
  return {e[0], e[1], e[2], e[3]};
}

inline Mat2 parse_matrix(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::invalid_input, std::string("malformed matrix: ") + e.what());
  }
  return matrix_from_json(j);
}

inline json to_json(const Mat2& m) { return json::array({{m.a11(), m.a12()}, {m.a21(), m.a22()}}); }
inline json to_json(const Vec2& v) { return json::array({v.x1, v.x2}); }

struct PairInput {
  Mat2 a1;
  Mat2 a2;
};

struct JobFile {
  std::vector<PairInput> pairs;
  json options = json::object();
};

/// {"pairs": [{"A1": [[..],[..]], "A2": [[..],[..]]}, ...], "options": {...}}
inline JobFile job_from_json(const json& j) {
  if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array()) {
    throw Error(ErrorCode::invalid_input, "input must be an object with a \"pairs\" array");
  }
  JobFile job;
  for (const auto& p : j["pairs"]) {
    if (!p.is_object() || !p.contains("A1") || !p.contains("A2")) {
      throw Error(ErrorCode::invalid_input, "each pair needs \"A1\" and \"A2\"");
    }
    job.pairs.push_back({matrix_from_json(p["A1"]), matrix_from_json(p["A2"])});
  }
  if (j.contains("options")) job.options = j["options"];
  return job;
}

inline json to_json(const InvariantSet& inv) {
  json j = {{"gamma", inv.gamma},   {"big_delta", inv.big_delta}, {"delta1", inv.delta1},
            {"delta2", inv.delta2}, {"delta_sign1", inv.delta_sign1}, {"delta_sign2", inv.delta_sign2},
            {"tau1", inv.tau1},     {"tau2", inv.tau2},           {"kappa", inv.kappa},
            {"det1", inv.det1},     {"det2", inv.det2},           {"tr1", inv.tr1},
            {"tr2", inv.tr2},       {"tr12", inv.tr12}};
  if (inv.t1) j["t1"] = *inv.t1;
  if (inv.t2) j["t2"] = *inv.t2;
  if (inv.r_value) j["r_value"] = *inv.r_value;
  return j;
}

inline json to_json(const QuadraticForm& q) {
  return {{"type", "quadratic-form"},
          {"P", json::array({{q.p11, q.p12}, {q.p12, q.p22}})},
          {"strict", q.strict}};
}

inline json to_json(const UnstableDirection& u) {
  return {{"type", "unstable-direction"},
          {"sigma0", u.sigma0},
          {"direction", to_json(u.direction)},
          {"eigenvalue", u.eigenvalue}};
}

inline json to_json(const WorstTrajectory& wt) {
  json arcs = json::array();
  for (const Arc& a : wt.arcs) {
    arcs.push_back({{"field", a.field}, {"duration", a.duration}, {"start", to_json(a.start)}});
  }
  return {{"type", "worst-trajectory"},
          {"start", to_json(wt.start)},
          {"end", to_json(wt.end)},
          {"return_ratio", wt.return_ratio},
          {"final_ratio", wt.final_ratio},
          {"rotation", wt.rotation < 0 ? "clockwise" : "counterclockwise"},
          {"arcs", arcs}};
}

inline json to_json(const Certificate& c) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return to_json(x);
        }
      },
      c);
}

inline json to_json(const Verdict& v) {
  json flags = json::array();
  for (const auto& f : v.flags) flags.push_back({{"name", f.name}, {"distance", f.distance}, {"detail", f.detail}});
  json j = {{"schema", schema_version},
            {"case", to_string(v.kind)},
            {"invariants", to_json(v.invariants)},
            {"certificate", to_json(v.certificate)},
            {"flags", flags}};
  if (v.r_numeric) j["r_numeric"] = *v.r_numeric;
  return j;
}

inline json to_json(const NormalFormResult& nf) {
  json j = {{"case", to_string(nf.case_tag)},
            {"B1", to_json(nf.b1)},
            {"B2", to_json(nf.b2)},
            {"T", to_json(nf.t)},
            {"alpha1", nf.alpha1},
            {"alpha2", nf.alpha2},
            {"swapped", nf.swapped},
            {"sign1", nf.sign1},
            {"sign2", nf.sign2}};
  j["F"] = nf.f ? json(*nf.f) : json(nullptr);
  if (!nf.note.empty()) j["note"] = nf.note;
  return j;
}

inline json to_json(const ProbeReport& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back({{"label", c.label}, {"ratio", c.ratio}});
  return {{"trials", r.trials},
          {"max_random_ratio", r.max_random_ratio},
          {"argmax_trial", r.argmax_trial},
          {"greedy_ratio", r.greedy_ratio},
          {"greedy_label", r.greedy_label},
          {"max_ratio", r.max_ratio()},
          {"diverged", r.diverged()},
          {"candidates", cands}};
}

inline json error_json(const Error& e) { return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}}; }

/// Header t,x1,x2,u,norm; classic locale, round-trip precision.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf.precision(17);
  buf << "t,x1,x2,u,norm\n";
  for (const Sample& s : traj.samples) {
    buf << s.t << ',' << s.x.x1 << ',' << s.x.x2 << ',' << s.u << ',' << norm(s.x) << '\n';
  }
  os << buf.str();
}

/// Dense samples along the arcs of a worst trajectory, `per_arc` points per arc.
inline Trajectory sample_worst_trajectory(const Mat2& a1, const Mat2& a2, const WorstTrajectory& wt, int per_arc = 100) {
  Trajectory traj;
  double t0 = 0.0;
  for (const Arc& arc : wt.arcs) {
    const Mat2& a = arc.field == 1 ? a1 : a2;
    const double u = arc.field == 1 ? 1.0 : 0.0;
    for (int i = 0; i < per_arc; ++i) {
      const double dt = arc.duration * i / per_arc;
      traj.samples.push_back({t0 + dt, expm(a, dt) * arc.start, u});
    }
    t0 += arc.duration;
  }
  traj.samples.push_back({t0, wt.end, wt.arcs.empty() ? 1.0 : (wt.arcs.back().field == 1 ? 1.0 : 0.0)});
  traj.final_norm_ratio = wt.final_ratio;
  return traj;
}

}  // namespace swstab::io
