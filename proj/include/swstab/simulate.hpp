#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "swstab/error.hpp"
#include "swstab/lyapunov.hpp"
#include "swstab/mat2.hpp"

namespace swstab {

/// Piecewise-constant control: values[k] holds on [breakpoints[k], breakpoints[k+1]), the
/// last value indefinitely. u = 1 selects A1, u = 0 selects A2, intermediate values the
/// convexified field u A1 + (1 - u) A2.
struct SwitchingSignal {
  std::vector<double> breakpoints{0.0};
  std::vector<double> values{1.0};

  void validate() const {
    if (breakpoints.empty() || breakpoints.size() != values.size()) {
      throw Error(ErrorCode::invalid_input, "switching signal needs one value per breakpoint");
    }
    if (breakpoints.front() != 0.0) throw Error(ErrorCode::invalid_input, "switching signal must start at t = 0");
    for (std::size_t k = 1; k < breakpoints.size(); ++k) {
      if (!(breakpoints[k] > breakpoints[k - 1])) {
        throw Error(ErrorCode::invalid_input, "breakpoints must be strictly increasing");
      }
    }
    for (double u : values) {
      if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::invalid_input, "control values must lie in [0, 1]");
    }
  }

  static SwitchingSignal constant(double u) { return {{0.0}, {u}}; }

  /// u = first on the first half of each period, 1 - first on the second half.
  static SwitchingSignal bang_bang(double period, double horizon, double first = 1.0) {
    SwitchingSignal s{{}, {}};
    const double half = 0.5 * period;
    const auto pieces = static_cast<std::size_t>(std::ceil(horizon / half));
    s.breakpoints.reserve(pieces);
    s.values.reserve(pieces);
    for (std::size_t k = 0; k < std::max<std::size_t>(pieces, 1); ++k) {
      s.breakpoints.push_back(static_cast<double>(k) * half);
      s.values.push_back(k % 2 == 0 ? first : 1.0 - first);
    }
    return s;
  }
};

struct Sample {
  double t{0.0};
  Vec2 x;
  double u{0.0};
};

struct Trajectory {
  std::vector<Sample> samples;
  double final_norm_ratio{1.0};
};

struct RunOptions {
  /// Spacing of an extra uniform sample grid; 0 records piece endpoints only.
  double sample_step{0.0};
};

inline Mat2 mixed_field(const Mat2& a1, const Mat2& a2, double u) { return u * a1 + (1.0 - u) * a2; }

namespace detail {

inline double norm_ratio(const Vec2& x, double x0_norm) { return x0_norm == 0.0 ? 1.0 : norm(x) / x0_norm; }

}  // namespace detail

/// Exact propagation x <- expm(u A1 + (1 - u) A2, dt) x on every piece up to `horizon`.
inline Trajectory run(const Mat2& a1, const Mat2& a2, const SwitchingSignal& signal, const Vec2& x0, double horizon,
                      const RunOptions& opts = {}) {
  signal.validate();
  Trajectory traj;
  Vec2 x = x0;
  const double x0_norm = norm(x0);
  for (std::size_t k = 0; k < signal.breakpoints.size(); ++k) {
    const double start = signal.breakpoints[k];
    if (start >= horizon && k > 0) break;
    const double end = k + 1 < signal.breakpoints.size() ? std::min(signal.breakpoints[k + 1], horizon) : horizon;
    const double u = signal.values[k];
    const Mat2 field = mixed_field(a1, a2, u);
    traj.samples.push_back({start, x, u});
    if (opts.sample_step > 0.0) {
      for (double g = (std::floor(start / opts.sample_step) + 1.0) * opts.sample_step; g < end;
           g += opts.sample_step) {
        traj.samples.push_back({g, expm(field, g - start) * x, u});
      }
    }
    if (end > start) x = expm(field, end - start) * x;
  }
  traj.samples.push_back({horizon, x, signal.values.back()});
  traj.final_norm_ratio = detail::norm_ratio(x, x0_norm);
  return traj;
}

enum class GreedyRule { radial_rate, clockwise_angle, counterclockwise_angle };

inline std::string to_string(GreedyRule r) {
  switch (r) {
    case GreedyRule::radial_rate: return "radial-rate";
    case GreedyRule::clockwise_angle: return "clockwise-angle";
    case GreedyRule::counterclockwise_angle: return "counterclockwise-angle";
  }
  return "unknown";
}

/// Angle from the outward radial direction at x to v, measured in the rotation sense
/// `sense` (+1 counterclockwise, -1 clockwise), in [0, 2 pi).
inline double angle_from_radial(const Vec2& x, const Vec2& v, int sense) {
  double a = std::atan2(sense * cross(x, v), dot(x, v));
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

/// Mode (1 or 2) the greedy adversary selects at x.
inline int greedy_choice(const Mat2& a1, const Mat2& a2, const Vec2& x, GreedyRule rule) {
  const Vec2 v1 = a1 * x;
  const Vec2 v2 = a2 * x;
  if (rule == GreedyRule::radial_rate) return dot(x, v1) >= dot(x, v2) ? 1 : 2;
  const int sense = rule == GreedyRule::clockwise_angle ? -1 : 1;
  return angle_from_radial(x, v1, sense) <= angle_from_radial(x, v2, sense) ? 1 : 2;
}

struct GreedyOptions {
  GreedyRule rule{GreedyRule::radial_rate};
  /// Samples kept; steps are thinned uniformly beyond this.
  std::size_t max_samples{10000};
};

/// Discrete-time adversary: every `dwell` it commits to the mode chosen by the rule at the
/// current state. radial_rate maximizes x^T A_i x; the angle rules pick the velocity closest
/// to the outward radial in the given rotation sense, whose dwell -> 0 limit is the worst
/// trajectory when the pair rotates in that sense.
inline Trajectory adversarial_greedy(const Mat2& a1, const Mat2& a2, const Vec2& x0, double dwell, double horizon,
                                     const GreedyOptions& opts = {}) {
  if (!(dwell > 0.0)) throw Error(ErrorCode::invalid_input, "dwell must be positive");
  const Mat2 e1 = expm(a1, dwell);
  const Mat2 e2 = expm(a2, dwell);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dwell - 1e-9));
  const std::size_t stride = std::max<std::size_t>(1, steps / std::max<std::size_t>(1, opts.max_samples));
  const double x0_norm = norm(x0);

  Trajectory traj;
  Vec2 x = x0;
  double t = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const int mode = greedy_choice(a1, a2, x, opts.rule);
    const double u = mode == 1 ? 1.0 : 0.0;
    if (k % stride == 0) traj.samples.push_back({t, x, u});
    const double dt = std::min(dwell, horizon - t);
    if (dt == dwell) {
      x = (mode == 1 ? e1 : e2) * x;
    } else {
      x = expm(mode == 1 ? a1 : a2, dt) * x;
    }
    t = k + 1 == steps ? horizon : t + dt;
    // Stop well before overflow; the ratio is already decisive.
    if (x0_norm > 0.0 && norm(x) > 1e150 * x0_norm) break;
  }
  traj.samples.push_back({t, x, traj.samples.empty() ? 1.0 : traj.samples.back().u});
  traj.final_norm_ratio = detail::norm_ratio(x, x0_norm);
  return traj;
}

struct ProbeCandidate {
  std::string label;
  double ratio{0.0};
};

struct ProbeReport {
  int trials{0};
  double max_random_ratio{0.0};
  int argmax_trial{-1};
  double greedy_ratio{0.0};
  std::string greedy_label;
  /// Deterministic probes: greedy runs and constant convexified controls.
  std::vector<ProbeCandidate> candidates;

  [[nodiscard]] double max_ratio() const {
    double m = std::max(max_random_ratio, greedy_ratio);
    for (const auto& c : candidates) m = std::max(m, c.ratio);
    return m;
  }
  [[nodiscard]] bool diverged(double threshold = 1e3) const { return max_ratio() > threshold; }
};

struct ProbeOptions {
  int threads{1};
  /// 0 selects 1e-3 / rate, rate = max(|tr A1|, |tr A2|) / 2.
  double greedy_dwell{0.0};
  int greedy_starts{8};
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// splitmix64 stream; identical on every platform, unlike the std distributions.
class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

 private:
  std::uint64_t state_;
};

inline double characteristic_rate(const Mat2& a1, const Mat2& a2) {
  const double r = 0.5 * std::max(std::abs(trace(a1)), std::abs(trace(a2)));
  return r > 0.0 ? r : 1.0;
}

inline double random_trial(const Mat2& a1, const Mat2& a2, double horizon, std::uint64_t seed, int trial) {
  TrialRng rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial))));
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  const Vec2 x0{std::cos(angle), std::sin(angle)};
  const bool convexified = rng.uniform() < 0.1;
  const double mean = 0.1 / characteristic_rate(a1, a2);
  SwitchingSignal sig{{}, {}};
  double t = 0.0;
  while (t < horizon) {
    sig.breakpoints.push_back(t);
    sig.values.push_back(convexified ? rng.uniform() : static_cast<double>(rng.next() & 1U));
    double dt = rng.exponential(mean);
    if (!(dt > 0.0)) dt = mean;
    t += dt;
  }
  if (sig.breakpoints.empty()) sig = SwitchingSignal::constant(1.0);
  return run(a1, a2, sig, x0, horizon).final_norm_ratio;
}

}  // namespace detail

/// Falsification probe: random switching signals (exponential dwell, mean 0.1 / rate, 10%
/// of trials convexified), greedy adversaries from several initial directions, and constant
/// convexified controls sigma on a grid plus the phi minimizer sigma0, each started on the
/// dominant real eigenvector of sigma A1 + (1 - sigma) A2.
///
/// Each trial draws from its own stream derived from (seed, trial index), so the report is
/// identical for any thread count.
inline ProbeReport guas_probe(const Mat2& a1, const Mat2& a2, int trials, double horizon, std::uint64_t seed,
                              const ProbeOptions& opts = {}) {
  if (trials <= 0) throw Error(ErrorCode::invalid_input, "probe needs at least one trial");
  ProbeReport rep;
  rep.trials = trials;

  std::vector<double> ratios(static_cast<std::size_t>(trials), 0.0);
  const int threads = std::clamp(opts.threads, 1, trials);
  auto worker = [&](int begin, int end) {
    for (int k = begin; k < end; ++k) ratios[static_cast<std::size_t>(k)] = detail::random_trial(a1, a2, horizon, seed, k);
  };
  if (threads == 1) {
    worker(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const int chunk = (trials + threads - 1) / threads;
    for (int i = 0; i < threads; ++i) {
      const int begin = i * chunk;
      const int end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
  }
  for (int k = 0; k < trials; ++k) {
    if (ratios[static_cast<std::size_t>(k)] > rep.max_random_ratio || rep.argmax_trial < 0) {
      rep.max_random_ratio = ratios[static_cast<std::size_t>(k)];
      rep.argmax_trial = k;
    }
  }

  const double rate = detail::characteristic_rate(a1, a2);
  const double dwell = opts.greedy_dwell > 0.0 ? opts.greedy_dwell : 1e-3 / rate;
  for (GreedyRule rule : {GreedyRule::radial_rate, GreedyRule::clockwise_angle, GreedyRule::counterclockwise_angle}) {
    for (int s = 0; s < opts.greedy_starts; ++s) {
      const double angle = std::numbers::pi * s / opts.greedy_starts;
      const double r =
          adversarial_greedy(a1, a2, {std::cos(angle), std::sin(angle)}, dwell, horizon, {rule, 2}).final_norm_ratio;
      if (r > rep.greedy_ratio || rep.greedy_label.empty()) {
        rep.greedy_ratio = r;
        rep.greedy_label = "greedy:" + to_string(rule) + ":" + std::to_string(s);
      }
    }
  }
  rep.candidates.push_back({rep.greedy_label, rep.greedy_ratio});

  std::vector<double> sigmas;
  for (int i = 0; i <= 20; ++i) sigmas.push_back(i / 20.0);
  if (det(a2) != 0.0) {
    if (const auto sp = sigma_polys(a1, a2); sp.sigma0) sigmas.push_back(*sp.sigma0);
  }
  for (double sigma : sigmas) {
    const EigenStructure es = eigen(mixed_field(a1, a2, sigma));
    if (es.kind == EigenKind::complex_conjugate) continue;
    const double r = run(a1, a2, SwitchingSignal::constant(sigma), es.vectors[0], horizon).final_norm_ratio;
    rep.candidates.push_back({"mix:" + std::to_string(sigma), r});
  }
  return rep;
}

}  // namespace swstab
