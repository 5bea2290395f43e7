#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swstab/classify.hpp"
#include "swstab/error.hpp"
#include "swstab/invariants.hpp"
#include "swstab/io.hpp"
#include "swstab/normal_form.hpp"
#include "swstab/simulate.hpp"
#include "swstab/worst_traj.hpp"

namespace swstab::cli {

using json = nlohmann::json;

enum ExitCode : int { ok = 0, input_error = 2, check_failure = 3 };

struct Options {
  std::string a1;
  std::string a2;
  std::string file;
  bool strict{false};
  double s3_band{1e-9};
  double r_band{1e-9};
  int threads{1};
  bool check{false};
  int revolutions{1};
  std::string csv;
  int per_arc{100};
  int trials{1000};
  double horizon{0.0};
  std::uint64_t seed{1};
  bool seed_given{false};
};

struct PairResult {
  json out;
  bool input_failed{false};
  bool check_failed{false};
};

namespace detail {

inline std::string csv_path(const std::string& base, std::size_t index, std::size_t count) {
  if (count <= 1) return base;
  const auto dot = base.find_last_of('.');
  const auto slash = base.find_last_of('/');
  const std::string suffix = "_" + std::to_string(index);
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return base + suffix;
  return base.substr(0, dot) + suffix + base.substr(dot);
}

inline InvariantSet invariants_with_r(const Mat2& a1, const Mat2& a2) {
  InvariantSet inv = compute_invariants(a1, a2);
  if (is_hurwitz(a1) && is_hurwitz(a2) && s4_conditions(inv)) complete_s4(inv);
  return inv;
}

inline PairResult run_pair(const std::string& command, const Options& opt, const io::PairInput& p, std::size_t index,
                           std::size_t count) {
  PairResult r;
  r.out = {{"schema", io::schema_version}, {"command", command}, {"index", index},
           {"A1", io::to_json(p.a1)},      {"A2", io::to_json(p.a2)}};
  try {
    if (command == "classify") {
      ClassifyOptions co;
      co.s3_band = opt.s3_band;
      co.r_band = opt.r_band;
      const Verdict v = classify(p.a1, p.a2, co);
      r.out.update(io::to_json(v));
      r.check_failed = v.cross_check_failed;
    } else if (command == "invariants") {
      r.out["invariants"] = io::to_json(invariants_with_r(p.a1, p.a2));
    } else if (command == "normal-form") {
      const NormalFormResult nf = normalize(p.a1, p.a2);
      r.out["normal_form"] = io::to_json(nf);
      if (opt.check) {
        const bool pass = verify_normal_form(nf, p.a1, p.a2, 1e-8);
        r.out["check"] = pass;
        r.check_failed = !pass;
      }
    } else if (command == "worst-trajectory") {
      const WorstTrajectory wt = worst_trajectory(p.a1, p.a2, default_start(p.a1, p.a2), opt.revolutions);
      r.out["worst_trajectory"] = io::to_json(wt);
      r.out["r_value"] = r_value(p.a1, p.a2);
      if (!opt.csv.empty()) {
        const std::string path = csv_path(opt.csv, index, count);
        std::ofstream f(path);
        if (!f) throw Error(ErrorCode::invalid_input, "cannot open " + path);
        io::write_csv(f, io::sample_worst_trajectory(p.a1, p.a2, wt, opt.per_arc));
        r.out["csv"] = path;
      }
    } else if (command == "probe") {
      const double horizon = opt.horizon > 0.0 ? opt.horizon : 50.0 / swstab::detail::characteristic_rate(p.a1, p.a2);
      const ProbeReport rep = guas_probe(p.a1, p.a2, opt.trials, horizon, opt.seed, {opt.threads});
      r.out["probe"] = io::to_json(rep);
      r.out["horizon"] = horizon;
      r.out["seed"] = opt.seed;
      if (is_hurwitz(p.a1) && is_hurwitz(p.a2)) {
        ClassifyOptions co;
        co.s3_band = opt.s3_band;
        co.r_band = opt.r_band;
        co.search_witness = false;
        const StabilityCase kind = classify(p.a1, p.a2, co).kind;
        r.out["case"] = to_string(kind);
        // Probing is one-sided: only an observed divergence can contradict the classifier.
        const bool consistent = !rep.diverged() || !is_bounded(kind);
        r.out["consistent"] = consistent;
        r.check_failed = !consistent;
      }
    }
  } catch (const Error& e) {
    r.out["error"] = io::error_json(e);
    r.input_failed = e.code() == ErrorCode::invalid_input || e.code() == ErrorCode::not_hurwitz;
    r.check_failed = !r.input_failed;
  }
  return r;
}

inline std::vector<json> read_records(std::istream& in) {
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<json> records;
  try {
    const json whole = json::parse(text);
    if (whole.is_array()) {
      for (const auto& x : whole) records.push_back(x);
    } else {
      records.push_back(whole);
    }
    return records;
  } catch (const json::parse_error&) {
    // One object per line.
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::invalid_input, std::string("malformed JSON record: ") + e.what());
    }
  }
  return records;
}

// Recomputes the invariants of each record and compares every stored field.
inline json validate_record(const json& rec, std::size_t index, bool& mismatch) {
  json out = {{"schema", io::schema_version}, {"command", "validate"}, {"index", index}};
  if (!rec.is_object() || !rec.contains("A1") || !rec.contains("A2") || !rec.contains("invariants")) {
    throw Error(ErrorCode::invalid_input, "record needs \"A1\", \"A2\" and \"invariants\"");
  }
  const Mat2 a1 = io::matrix_from_json(rec["A1"]);
  const Mat2 a2 = io::matrix_from_json(rec["A2"]);
  const json fresh = io::to_json(invariants_with_r(a1, a2));
  json diffs = json::array();
  for (const auto& [key, stored] : rec["invariants"].items()) {
    if (!fresh.contains(key)) {
      diffs.push_back({{"field", key}, {"reason", "unexpected field"}});
      continue;
    }
    const double want = fresh[key].get<double>();
    const double got = stored.get<double>();
    if (std::abs(want - got) > 1e-12 * std::max(1.0, std::abs(want))) {
      diffs.push_back({{"field", key}, {"stored", got}, {"recomputed", want}});
    }
  }
  for (const auto& [key, value] : fresh.items()) {
    if (!rec["invariants"].contains(key)) diffs.push_back({{"field", key}, {"reason", "missing field"}});
  }
  mismatch = !diffs.empty();
  out["valid"] = !mismatch;
  out["mismatches"] = diffs;
  return out;
}

inline void add_pair_options(CLI::App* sub, Options& opt) {
  sub->add_option("--a1", opt.a1, "first matrix, e.g. \"[[-1,10],[0,-1]]\"");
  sub->add_option("--a2", opt.a2, "second matrix");
  sub->add_option("--file", opt.file, "JSON job file {\"pairs\": [...], \"options\": {...}}");
  sub->add_flag("--strict", opt.strict, "stop at the first failing pair; escalate cross-check failures");
  sub->add_option("--s3-band", opt.s3_band, "relative S3 band width");
  sub->add_option("--r-band", opt.r_band, "S4 marginal band on |R - 1|");
  sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
}

inline bool given(const CLI::App& sub, const std::string& flag) {
  const CLI::Option* o = sub.get_option_no_throw(flag);
  return o != nullptr && o->count() > 0;
}

inline void apply_file_options(const json& o, Options& opt, const CLI::App& sub) {
  auto set = [&](const char* key, const char* flag, auto& field) {
    if (o.contains(key) && !given(sub, flag)) field = o[key].get<std::decay_t<decltype(field)>>();
  };
  set("s3_band", "--s3-band", opt.s3_band);
  set("r_band", "--r-band", opt.r_band);
  set("trials", "--trials", opt.trials);
  set("horizon", "--horizon", opt.horizon);
  set("revolutions", "--revolutions", opt.revolutions);
  set("threads", "--threads", opt.threads);
  if (o.contains("seed") && !opt.seed_given) {
    opt.seed = o["seed"].get<std::uint64_t>();
    opt.seed_given = true;
  }
}

}  // namespace detail

/// Entry point of the swstab tool; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Stability of planar switched linear systems with two modes"};
  app.require_subcommand(1);
  Options opt;

  auto* classify_cmd = app.add_subcommand("classify", "stability verdict with certificate");
  auto* invariants_cmd = app.add_subcommand("invariants", "coordinate-invariant scalars of the pair");
  auto* normal_cmd = app.add_subcommand("normal-form", "canonical representative of the pair");
  auto* worst_cmd = app.add_subcommand("worst-trajectory", "worst trajectory of an S4 pair");
  auto* probe_cmd = app.add_subcommand("probe", "randomized and greedy falsification probe");
  auto* validate_cmd = app.add_subcommand("validate", "recompute and compare stored invariants output");
  for (auto* sub : {classify_cmd, invariants_cmd, normal_cmd, worst_cmd, probe_cmd}) detail::add_pair_options(sub, opt);
  normal_cmd->add_flag("--check", opt.check, "verify the reduction");
  worst_cmd->add_option("--revolutions", opt.revolutions, "number of revolutions")->check(CLI::PositiveNumber);
  worst_cmd->add_option("--csv", opt.csv, "write sampled trajectory to this CSV file");
  worst_cmd->add_option("--samples-per-arc", opt.per_arc, "CSV samples per arc")->check(CLI::PositiveNumber);
  probe_cmd->add_option("--trials", opt.trials, "random trials")->check(CLI::PositiveNumber);
  probe_cmd->add_option("--horizon", opt.horizon, "time horizon (default 50 / max|tr|/2)");
  probe_cmd->add_option("--seed", opt.seed, "PRNG seed (default from SWSTAB_SEED, else 1)");
  validate_cmd->add_option("--file", opt.file, "invariants output (JSON or one object per line; - for stdin)")
      ->required();
  validate_cmd->add_flag("--strict", opt.strict, "stop at the first malformed record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : input_error;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  if (command == "validate") {
    std::vector<json> records;
    try {
      if (opt.file == "-") {
        records = detail::read_records(std::cin);
      } else {
        std::ifstream f(opt.file);
        if (!f) throw Error(ErrorCode::invalid_input, "cannot open " + opt.file);
        records = detail::read_records(f);
      }
    } catch (const Error& e) {
      err << e.what() << '\n';
      return input_error;
    }
    int code = ok;
    for (std::size_t i = 0; i < records.size(); ++i) {
      try {
        bool mismatch = false;
        out << detail::validate_record(records[i], i, mismatch).dump() << '\n';
        if (mismatch) code = check_failure;
      } catch (const std::exception& e) {
        out << json{{"schema", io::schema_version}, {"command", "validate"}, {"index", i},
                    {"error", {{"code", "InvalidInput"}, {"message", e.what()}}}}
                   .dump()
            << '\n';
        if (code == ok) code = input_error;
        if (opt.strict) return input_error;
      }
    }
    return code;
  }

  if (detail::given(*sub, "--seed")) {
    opt.seed_given = true;
  } else if (const char* env = std::getenv("SWSTAB_SEED")) {
    try {
      opt.seed = std::stoull(env);
      opt.seed_given = true;
    } catch (const std::exception&) {
      err << "SWSTAB_SEED is not an unsigned integer\n";
      return input_error;
    }
  }

  std::vector<io::PairInput> pairs;
  try {
    if (!opt.file.empty()) {
      if (!opt.a1.empty() || !opt.a2.empty()) throw Error(ErrorCode::invalid_input, "use either --file or --a1/--a2");
      std::ifstream f(opt.file);
      if (!f) throw Error(ErrorCode::invalid_input, "cannot open " + opt.file);
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::invalid_input, std::string("malformed JSON: ") + e.what());
      }
      io::JobFile job = io::job_from_json(j);
      detail::apply_file_options(job.options, opt, *sub);
      pairs = std::move(job.pairs);
    } else {
      if (opt.a1.empty() || opt.a2.empty()) throw Error(ErrorCode::invalid_input, "need --a1 and --a2, or --file");
      pairs.push_back({io::parse_matrix(opt.a1), io::parse_matrix(opt.a2)});
    }
  } catch (const Error& e) {
    err << e.what() << '\n';
    return input_error;
  } catch (const json::exception& e) {
    err << "InvalidInput: " << e.what() << '\n';
    return input_error;
  }

  const std::size_t n = pairs.size();
  std::vector<PairResult> results(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) results[i] = detail::run_pair(command, opt, pairs[i], i, n);
  };
  // The probe parallelizes its own trials; batches parallelize across pairs.
  const auto threads = static_cast<std::size_t>(command == "probe" ? 1 : std::max(1, opt.threads));
  if (opt.strict || threads == 1 || n < 2) {
    int code = ok;
    for (std::size_t i = 0; i < n; ++i) {
      work(i, i + 1);
      out << results[i].out.dump() << '\n';
      if (results[i].input_failed) code = input_error;
      if (results[i].check_failed && opt.strict) code = check_failure;
      if (opt.strict && code != ok) return code;
    }
    return code;
  }
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back(work, b, std::min(n, b + chunk));
  }
  int code = ok;
  for (const auto& r : results) {
    out << r.out.dump() << '\n';
    if (r.input_failed) code = input_error;
  }
  return code;
}

}  // namespace swstab::cli
