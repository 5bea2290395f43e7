#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "swstab/cli.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct CliRun {
  int code{0};
  std::string out;
  std::string err;

  [[nodiscard]] std::vector<json> lines() const {
    std::vector<json> v;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) v.push_back(json::parse(line));
    }
    return v;
  }
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swstab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = swstab::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path temp_file(const std::string& name) { return fs::temp_directory_path() / ("swstab_test_" + name); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

const std::string kS2a = "[[-1,10],[0,-1]]";
const std::string kS2b = "[[-1,0],[10,-1]]";
const std::string kB1 = "[[-0.1,1],[-1,-0.1]]";
const std::string kB2 = "[[-0.1,0.5],[-2,-0.1]]";

TEST(Cli, ClassifyEmitsOneJsonObject) {
  const CliRun r = cli({"classify", "--a1", kS2a, "--a2", kS2b});
  EXPECT_EQ(r.code, 0);
  const auto lines = r.lines();
  ASSERT_EQ(lines.size(), 1U);
  const json& j = lines[0];
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["command"], "classify");
  EXPECT_EQ(j["case"], "S2-unbounded");
  EXPECT_DOUBLE_EQ(j["invariants"]["gamma"].get<double>(), -49.0);
  EXPECT_TRUE(j.contains("certificate"));
}

TEST(Cli, ClassifyAcceptsFlatMatrices) {
  const CliRun r = cli({"classify", "--a1", "[-1,10,0,-1]", "--a2", "[-1,0,10,-1]"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.lines()[0]["case"], "S2-unbounded");
}

TEST(Cli, S4ClassifyReportsBothRatios) {
  const json j = cli({"classify", "--a1", kB1, "--a2", kB2}).lines()[0];
  EXPECT_EQ(j["case"], "S4-unbounded");
  EXPECT_NEAR(j["invariants"]["r_value"].get<double>(), 1.4657, 1e-4);
}

TEST(Cli, MalformedMatrixExitsTwo) {
  const CliRun r = cli({"classify", "--a1", "[[1,2],[3]]", "--a2", kS2b});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, NonHurwitzPairExitsTwoWithStructuredError) {
  const CliRun r = cli({"classify", "--a1", "[[0,1],[-1,0]]", "--a2", kS2b});
  EXPECT_EQ(r.code, 2);
  const json j = r.lines()[0];
  EXPECT_EQ(j["error"]["code"], "NotHurwitz");
}

TEST(Cli, MissingSubcommandOrMatrixExitsTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"classify", "--a1", kS2a}).code, 2);
  EXPECT_EQ(cli({"classify", "--bogus"}).code, 2);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(cli({"--help"}).code, 0); }

TEST(Cli, NormalFormCheck) {
  const CliRun r = cli({"normal-form", "--a1", kB1, "--a2", kB2, "--check"});
  EXPECT_EQ(r.code, 0);
  const json j = r.lines()[0];
  EXPECT_EQ(j["check"], true);
  EXPECT_TRUE(j.contains("normal_form"));
}

TEST(Cli, WorstTrajectoryWritesCsv) {
  const fs::path csv = temp_file("worst.csv");
  fs::remove(csv);
  const CliRun r =
      cli({"worst-trajectory", "--a1", kB1, "--a2", kB2, "--revolutions", "2", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = r.lines()[0];
  EXPECT_EQ(j["worst_trajectory"]["arcs"].size(), 4U);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "t,x1,x2,u,norm");
  std::string row;
  int rows = 0;
  while (std::getline(f, row)) {
    ++rows;
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 4) << row;
  }
  EXPECT_GT(rows, 100);
  fs::remove(csv);
}

TEST(Cli, ThreeRevolutionCsvTurnsClockwiseAndCompounds) {
  const fs::path csv = temp_file("three.csv");
  const CliRun r =
      cli({"worst-trajectory", "--a1", kB1, "--a2", kB2, "--revolutions", "3", "--csv", csv.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(csv);
  std::string line;
  std::getline(f, line);
  std::vector<std::array<double, 5>> rows;
  while (std::getline(f, line)) {
    std::array<double, 5> v{};
    std::istringstream in(line);
    for (double& x : v) {
      in >> x;
      in.ignore(1);
    }
    rows.push_back(v);
  }
  ASSERT_GT(rows.size(), 10U);
  // Unwrapped polar angle strictly decreases between distinct sample times.
  double prev = std::atan2(rows[0][2], rows[0][1]);
  double unwrapped = prev;
  double last = unwrapped;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double a = std::atan2(rows[i][2], rows[i][1]);
    double d = a - prev;
    if (d > std::numbers::pi) d -= 2 * std::numbers::pi;
    if (d < -std::numbers::pi) d += 2 * std::numbers::pi;
    prev = a;
    unwrapped += d;
    if (rows[i][0] > rows[i - 1][0]) {
      EXPECT_LT(unwrapped, last) << i;
      last = unwrapped;
    }
  }
  const double r_value = r.lines()[0]["r_value"].get<double>();
  EXPECT_NEAR(rows.back()[4] / rows.front()[4], std::pow(r_value, 3), 1e-9 * std::pow(r_value, 3));
  EXPECT_NEAR(rows.back()[4] / rows.front()[4], 1.466 * 1.466 * 1.466, 1e-2);
  fs::remove(csv);
}

TEST(Cli, InvariantsOfIdenticalModesFromFile) {
  const fs::path job = temp_file("identical.json");
  write_file(job, R"({"pairs": [{"A1": [[-1,0],[0,-1]], "A2": [[-1,0],[0,-1]]}]})");
  const CliRun r = cli({"invariants", "--file", job.string()});
  EXPECT_EQ(r.code, 0);
  const json inv = r.lines()[0]["invariants"];
  EXPECT_DOUBLE_EQ(inv["gamma"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(inv["big_delta"].get<double>(), 0.0);
  fs::remove(job);
}

TEST(Cli, WorstTrajectoryRejectsNonS4Pair) {
  const CliRun r = cli({"worst-trajectory", "--a1", kS2a, "--a2", kS2b});
  const json j = r.lines()[0];
  EXPECT_EQ(j["error"]["code"], "PreconditionError");
}

TEST(Cli, ProbeSeedPrecedence) {
  const auto seed_of = [](const CliRun& r) { return r.lines()[0]["seed"].get<std::uint64_t>(); };
  ::unsetenv("SWSTAB_SEED");
  EXPECT_EQ(seed_of(cli({"probe", "--a1", kB1, "--a2", kB2, "--trials", "4", "--horizon", "5"})), 1U);
  ::setenv("SWSTAB_SEED", "77", 1);
  const CliRun env = cli({"probe", "--a1", kB1, "--a2", kB2, "--trials", "4", "--horizon", "5"});
  EXPECT_EQ(seed_of(env), 77U);
  EXPECT_EQ(seed_of(cli({"probe", "--a1", kB1, "--a2", kB2, "--trials", "4", "--horizon", "5", "--seed", "5"})), 5U);
  ::setenv("SWSTAB_SEED", "not-a-number", 1);
  EXPECT_EQ(cli({"probe", "--a1", kB1, "--a2", kB2, "--trials", "4"}).code, 2);
  ::unsetenv("SWSTAB_SEED");
}

TEST(Cli, ProbeIsReproducible) {
  ::unsetenv("SWSTAB_SEED");
  const std::vector<std::string> args{"probe", "--a1", kB1, "--a2", kB2, "--trials", "16", "--horizon", "10", "--seed", "3"};
  const CliRun a = cli(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "4"});
  const CliRun b = cli(threaded);
  EXPECT_EQ(a.lines()[0]["probe"], b.lines()[0]["probe"]);
  EXPECT_EQ(a.lines()[0]["consistent"], true);
}

TEST(Cli, BatchFilePreservesOrderAndAppliesOptions) {
  const fs::path job = temp_file("job.json");
  write_file(job, R"({"pairs": [
      {"A1": [[-1,10],[0,-1]], "A2": [[-1,0],[10,-1]]},
      {"A1": [[-0.1,1],[-1,-0.1]], "A2": [[-0.1,0.5],[-2,-0.1]]},
      {"A1": [[-1,0],[0,-1]], "A2": [[-2,0],[0,-3]]}],
    "options": {"threads": 3, "s3_band": 1e-9}})");
  const CliRun r = cli({"classify", "--file", job.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto lines = r.lines();
  ASSERT_EQ(lines.size(), 3U);
  EXPECT_EQ(lines[0]["case"], "S2-unbounded");
  EXPECT_EQ(lines[1]["case"], "S4-unbounded");
  EXPECT_EQ(lines[2]["case"], "S1-quadratic-LF");
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(lines[i]["index"], i);
  fs::remove(job);
}

TEST(Cli, BatchWithBadPairContinuesUnlessStrict) {
  const fs::path job = temp_file("bad.json");
  write_file(job, R"({"pairs": [
      {"A1": [[1,0],[0,1]], "A2": [[-1,0],[0,-1]]},
      {"A1": [[-1,0],[0,-1]], "A2": [[-2,0],[0,-3]]}]})");
  const CliRun lax = cli({"classify", "--file", job.string()});
  EXPECT_EQ(lax.code, 2);
  EXPECT_EQ(lax.lines().size(), 2U);
  const CliRun strict = cli({"classify", "--file", job.string(), "--strict"});
  EXPECT_EQ(strict.code, 2);
  EXPECT_EQ(strict.lines().size(), 1U);
  fs::remove(job);
}

TEST(Cli, MalformedJobFileExitsTwo) {
  const fs::path job = temp_file("malformed.json");
  write_file(job, R"({"pairs": [{"A1": [[-1,0],[0,-1]]}]})");
  EXPECT_EQ(cli({"classify", "--file", job.string()}).code, 2);
  write_file(job, "{not json");
  EXPECT_EQ(cli({"classify", "--file", job.string()}).code, 2);
  fs::remove(job);
}

TEST(Cli, InvariantsRoundTripThroughValidate) {
  const CliRun inv = cli({"invariants", "--a1", kB1, "--a2", kB2});
  ASSERT_EQ(inv.code, 0);
  const fs::path stored = temp_file("inv.jsonl");
  write_file(stored, inv.out);
  const CliRun ok = cli({"validate", "--file", stored.string()});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_EQ(ok.lines()[0]["valid"], true);

  json tampered = inv.lines()[0];
  tampered["invariants"]["gamma"] = tampered["invariants"]["gamma"].get<double>() * (1 + 1e-9);
  write_file(stored, tampered.dump() + "\n");
  const CliRun bad = cli({"validate", "--file", stored.string()});
  EXPECT_EQ(bad.code, 3);
  EXPECT_EQ(bad.lines()[0]["valid"], false);
  EXPECT_EQ(bad.lines()[0]["mismatches"][0]["field"], "gamma");
  fs::remove(stored);
}

TEST(Cli, CsvPathIsSuffixedInBatches) {
  using swstab::cli::detail::csv_path;
  EXPECT_EQ(csv_path("out.csv", 0, 1), "out.csv");
  EXPECT_EQ(csv_path("out.csv", 2, 3), "out_2.csv");
  EXPECT_EQ(csv_path("dir.v/out", 1, 3), "dir.v/out_1");
}

}  // namespace
