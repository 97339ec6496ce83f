#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "kacbath/csv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "kacbath");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = kacbath::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("kacbath_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = (dir / "c.json").string();
    kacbath::write_text_file(config, R"({"M": 1, "N": 2, "degree": 2, "t_end": 5,
      "grid": {"kind": "geometric", "points": 12}, "h0": {"family": "linear", "epsilon": 0.1},
      "ensemble": 200})");
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path dir;
  std::string config;
};

json error_record(const std::string& err) {
  EXPECT_EQ(err.find('\n'), err.size() - 1) << "error record must be one line";
  return json::parse(err);
}

}  // namespace

TEST_F(CliTest, DistanceWritesCurveAndReport) {
  const auto out = (dir / "curve.csv").string();
  const Result r = run({"distance", "--config", config, "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = kacbath::read_text_file(out);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,distance,bound,bound_term1,bound_term2");
  const json rep = json::parse(kacbath::read_text_file(out + ".report.json"));
  EXPECT_EQ(rep["command"], "distance");
  EXPECT_TRUE(rep["passed"].get<bool>());
  EXPECT_EQ(json::parse(r.out), rep);
}

TEST_F(CliTest, Lemma3Report) {
  const Result r = run({"verify-lemma3", "--max-degree", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(r.out);
  ASSERT_EQ(rep["data"]["per_degree"].size(), 4u);
  for (const auto& d : rep["data"]["per_degree"]) EXPECT_LE(d["hermite_top"].get<double>(), 2.0 / 3.0 + 1e-10);
}

TEST_F(CliTest, ReportAggregates) {
  ASSERT_EQ(run({"gap", "--config", config, "--out", (dir / "run/gap.csv").string()}).code, 0);
  ASSERT_EQ(run({"bound", "--config", config, "--out", (dir / "run/bound.csv").string()}).code, 0);
  const Result r = run({"report", "--dir", (dir / "run").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json agg = json::parse(r.out);
  EXPECT_TRUE(agg["passed"].get<bool>());
  EXPECT_EQ(agg["reports"].size(), 2u);
}

TEST_F(CliTest, ReportFlagsFailures) {
  fs::create_directories(dir / "run");
  kacbath::write_text_file(dir / "run/x.report.json", R"({"command": "gap", "passed": false, "checks": []})");
  EXPECT_EQ(run({"report", "--dir", (dir / "run").string()}).code, 3);
}

TEST_F(CliTest, SimulateIsReproducible) {
  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
  ASSERT_EQ(run({"simulate", "--config", config, "--out", a, "--seed", "5"}).code, 0);
  ASSERT_EQ(run({"simulate", "--config", config, "--out", b, "--seed", "5", "--threads", "2"}).code, 0);
  EXPECT_EQ(kacbath::read_text_file(a), kacbath::read_text_file(b));
}

TEST_F(CliTest, ConfigErrorExitCode) {
  kacbath::write_text_file(dir / "bad.json", R"({"N": 1})");
  const Result r = run({"gap", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, 2);
  const json e = error_record(r.err);
  EXPECT_EQ(e["error"]["kind"], "config");
  EXPECT_EQ(e["error"]["exit_code"], 2);
}

TEST_F(CliTest, UsageErrorExitCode) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"distance", "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({"verify-lemma3", "--max-degree", "9"}).code, 2);
}

TEST_F(CliTest, IoErrorExitCode) {
  const Result r = run({"gap", "--config", (dir / "missing.json").string()});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(error_record(r.err)["error"]["kind"], "io");
  EXPECT_EQ(run({"report", "--dir", (dir / "empty").string()}).code, 4);
}

TEST_F(CliTest, FailedCheckExitCode) {
  // The identity check of verify-lemma2 does not hold exactly; the command
  // reports it and exits with the numerical code.
  kacbath::write_text_file(dir / "l2.json", R"({"lemma2": {"random": 1, "degree": 2}})");
  const Result r = run({"verify-lemma2", "--config", (dir / "l2.json").string(), "--reservoirs", "2"});
  EXPECT_EQ(r.code, 3);
  const json rep = json::parse(r.out);
  for (const auto& c : rep["checks"]) {
    if (c["name"] != "identity_lhs_equals_rhs") {
      EXPECT_TRUE(c["passed"].get<bool>()) << c["name"];
    }
  }
}
