#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ordlab/cli.hpp"
#include "ordlab/errors.hpp"

using namespace ordlab;
using nlohmann::json;

namespace {

RunConfig base(const std::string& command, const std::string& metric = {}) {
  RunConfig c;
  c.command = command;
  c.metric = metric;
  c.timestamp = false;
  return c;
}

json run_json(const RunConfig& c) { return json::parse(run(c).body); }

}  // namespace

TEST(ParseIntList, RangesAndLists) {
  EXPECT_EQ(parse_int_list("0"), std::vector<int>{0});
  EXPECT_EQ(parse_int_list("0,1,3..5"), (std::vector<int>{0, 1, 3, 4, 5}));
  EXPECT_EQ(parse_int_list("-1..1"), (std::vector<int>{-1, 0, 1}));
  EXPECT_THROW(parse_int_list(""), ParseError);
  EXPECT_THROW(parse_int_list("1,x"), ParseError);
  EXPECT_THROW(parse_int_list("3..1"), ParseError);
  EXPECT_THROW(parse_int_list("1.5"), ParseError);
}

TEST(OutputFormat, Parse) {
  EXPECT_EQ(parse_output_format("csv"), OutputFormat::csv);
  EXPECT_STREQ(to_string(OutputFormat::pretty), "pretty");
  EXPECT_THROW(parse_output_format("xml"), ParseError);
}

TEST(Run, ReportEnvelope) {
  RunConfig c = base("curvature", "stereo-sphere:3:1");
  c.formula = CurvatureFormula::six_term;
  const json j = run_json(c);
  EXPECT_EQ(j["command"], "curvature");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_TRUE(j["failures"].empty());
  EXPECT_TRUE(j["error"].is_null());
  EXPECT_FALSE(j.contains("timestamp"));
  EXPECT_EQ(j["config"]["seed"], 42);
  EXPECT_EQ(j["config"]["points"], 10);
  EXPECT_TRUE(j["config"].contains("tolerance"));
  EXPECT_TRUE(j["config"]["diff"].contains("base_step"));
}

TEST(Run, TimestampOnlyWhenRequested) {
  RunConfig c = base("identities", "euclidean:2");
  c.timestamp = true;
  EXPECT_TRUE(run_json(c).contains("timestamp"));
}

TEST(Run, DeterministicForFixedSeed) {
  for (const char* cmd : {"curvature", "potential", "identities"}) {
    RunConfig c = base(cmd, "poly-perturb:3:5:0.1");
    if (std::string(cmd) == "potential") c.metric = "conf-gauss:3:0.2";
    EXPECT_EQ(run(c).body, run(c).body) << cmd;
    RunConfig other = c;
    other.seed = 43;
    EXPECT_NE(run(c).body, run(other).body) << cmd;
  }
}

TEST(Run, CurvatureFlagsFiveTermGap) {
  const RunResult five = run(base("curvature", "poly-perturb:3:1:0.1"));
  EXPECT_EQ(five.exit_code, 1);
  EXPECT_FALSE(five.failures.empty());
  RunConfig six = base("curvature", "poly-perturb:3:1:0.1");
  six.formula = CurvatureFormula::six_term;
  EXPECT_EQ(run(six).exit_code, 0);
  EXPECT_EQ(run(base("curvature", "euclidean:3")).exit_code, 0);
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(run(base("identities", "poly-perturb:3:2:0.1")).exit_code, 0);
  // off the cancellation line there is no prediction to fail
  RunConfig unchecked = base("potential", "conf-gauss:3:0.25");
  unchecked.ordering = "power:0:0.1";
  EXPECT_EQ(run(unchecked).exit_code, 0);
  // the five-term form also misses -g^ab_,ab on conformally flat metrics
  EXPECT_EQ(run(base("curvature", "stereo-sphere:3:1")).exit_code, 1);
  EXPECT_EQ(run(base("curvature", "nonsense:3")).exit_code, 2);
  EXPECT_EQ(run(base("curvature")).exit_code, 2);
  EXPECT_EQ(run(base("frobnicate", "euclidean:2")).exit_code, 2);
  RunConfig bad_ordering = base("potential", "euclidean:2");
  bad_ordering.ordering = "weyl";
  EXPECT_EQ(run(bad_ordering).exit_code, 2);
  RunConfig mismatch = base("exponents", "conf-gauss:3:0.25");
  mismatch.dimension = 4;
  EXPECT_EQ(run(mismatch).exit_code, 2);
}

TEST(Run, TinyToleranceFails) {
  RunConfig c = base("curvature", "stereo-sphere:3:1");
  c.formula = CurvatureFormula::six_term;
  c.tolerance = 1e-30;
  EXPECT_EQ(run(c).exit_code, 1);
}

TEST(Run, PotentialOrderings) {
  for (const char* ordering : {"conformal", "conformal-lb", "power:-0.16666666666666666:0.08333333333333333"}) {
    RunConfig c = base("potential", "conf-gauss:3:0.25");
    c.ordering = ordering;
    const json j = run_json(c);
    EXPECT_TRUE(j["pass"].get<bool>()) << ordering;
    EXPECT_NEAR(j["result"]["fit"]["C"].get<double>(), -0.125, 1e-6) << ordering;
  }
  RunConfig lb = base("potential", "stereo-sphere:4:1");
  lb.ordering = "lb";
  EXPECT_NEAR(run_json(lb)["result"]["fit"]["C"].get<double>(), 0.0, 1e-9);
}

TEST(Run, ExponentsReport) {
  RunConfig c = base("exponents");
  c.dimension = 3;
  const json j = run_json(c);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["result"]["exact"].size(), 2u);
  EXPECT_EQ(j["result"]["verification"]["roots"].size(), 2u);
}

TEST(Run, HydrogenCsv) {
  RunConfig c = base("hydrogen");
  c.n_max = 2;
  c.ms = {0, 1};
  c.format = OutputFormat::csv;
  const RunResult r = run(c);
  EXPECT_EQ(r.exit_code, 0);
  std::istringstream in(r.body);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "n,l,m,E_closed,E_numeric,abs_err,rel_err");
  int rows = 0;
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  EXPECT_EQ(rows, 6);
}

TEST(Run, RankExpectation) {
  RunConfig c = base("rank");
  c.expect_rank = 7;
  EXPECT_EQ(run(c).exit_code, 0);
  c.expect_rank = 5;
  EXPECT_EQ(run(c).exit_code, 1);
  c.family = "poly-perturb:2:1..4:0.1";
  c.expect_rank = 6;
  EXPECT_EQ(run(c).exit_code, 0);
}

TEST(Run, Oscillator) {
  RunConfig c = base("oscillator");
  EXPECT_EQ(run(c).exit_code, 0);
  c.omega = -1.0;
  EXPECT_EQ(run(c).exit_code, 2);
}

TEST(Run, PrettyFormat) {
  RunConfig c = base("identities", "euclidean:2");
  c.format = OutputFormat::pretty;
  const RunResult r = run(c);
  EXPECT_EQ(r.body.rfind("identities", 0), 0u);
  EXPECT_NE(r.body.find("PASS"), std::string::npos);
}

TEST(Run, WritesOutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "ordlab_cli_test.json";
  RunConfig c = base("identities", "euclidean:3");
  c.out = path.string();
  const RunResult r = run(c);
  ASSERT_EQ(r.exit_code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), r.body);
  std::filesystem::remove(path);

  c.out = "/nonexistent-dir/for/sure/report.json";
  EXPECT_EQ(run(c).exit_code, 2);
}
