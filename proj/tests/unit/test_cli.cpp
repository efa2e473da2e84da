#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const oracle::TempDir& dir, const std::string& args) {
  const auto out = dir.path() / "stdout.txt";
  const auto err = dir.path() / "stderr.txt";
  const std::string cmd = std::string(LFPTD_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write_lines(const fs::path& p, const std::vector<double>& xs) {
  std::ofstream out(p);
  out << "value\n";
  out.precision(17);
  for (double x : xs) out << x << "\n";
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  oracle::TempDir dir("cli-usage");
  EXPECT_EQ(cli(dir, "").code, 2);
  EXPECT_EQ(cli(dir, "frobnicate").code, 2);
  EXPECT_EQ(cli(dir, "sdp --in /no/such/file.csv --out x.svg").code, 2);
  EXPECT_EQ(cli(dir, "synth --profile unicorn --out " + (dir.path() / "c").string()).code, 2);
  EXPECT_EQ(cli(dir, "--help").code, 0);
}

TEST(Cli, SynthThenAnalyse) {
  oracle::TempDir dir("cli-synth");
  const auto cohort = dir.path() / "cohort";
  ASSERT_EQ(cli(dir, "--seed 5 synth --profile food --profile saline --subjects 1 --duration 20 --out " +
                         cohort.string()).code,
            0);
  EXPECT_TRUE(fs::exists(cohort / "food-01_pre.csv"));
  EXPECT_TRUE(fs::exists(cohort / "saline-01_post.json"));
  EXPECT_FALSE(fs::exists(cohort / "morphine-01_pre.csv"));

  const auto pre = (cohort / "food-01_pre.csv").string();
  const auto post = (cohort / "food-01_post.csv").string();

  auto r = cli(dir, "classify --method corr --preprocess --pre " + pre + " --post " + post);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["predicted"], "FOOD");

  r = cli(dir, "kld --mode gauss2d --pre " + pre + " --post " + post);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(json::parse(r.out)["k_2d_nats"].get<double>(), 0.0);

  r = cli(dir, "kld --mode triangle --pre " + pre + " --post " + post);
  EXPECT_EQ(r.code, 2);

  r = cli(dir, "fit --column nac --in " + pre);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["column"], "NAC");

  const auto filtered = dir.path() / "filtered.csv";
  r = cli(dir, "preprocess --in " + pre + " --out " + filtered.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(filtered));
  EXPECT_TRUE(fs::exists(dir.path() / "filtered.json"));

  r = cli(dir, "validate --max-windows 2 --column hip --in " + filtered.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto v = json::parse(r.out);
  EXPECT_EQ(v["channels"].size(), 1u);
  EXPECT_EQ(v["channels"][0]["windows"].size(), 2u);
}

TEST(Cli, SdpWritesSvgAndCsv) {
  oracle::TempDir dir("cli-sdp");
  const auto cohort = dir.path() / "cohort";
  ASSERT_EQ(cli(dir, "synth --profile saline --subjects 1 --duration 20 --out " + cohort.string()).code, 0);
  const auto svg = dir.path() / "p.svg";
  const auto csv = dir.path() / "p.csv";
  const auto r = cli(dir, "sdp --L 2 --theta 60 --in " + (cohort / "saline-01_pre.csv").string() + " --out " +
                              svg.string() + " --out-csv " + csv.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(svg).find("</svg>"), std::string::npos);
  // 20000 samples, lag 2, six sectors, a mirror pair each.
  std::istringstream rows(slurp(csv));
  std::string line;
  std::getline(rows, line);
  EXPECT_EQ(line, "radius,angle_deg");
  std::size_t n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 19998u * 6 * 2);

  EXPECT_EQ(cli(dir, "sdp --in " + (cohort / "saline-01_pre.csv").string()).code, 2);
  EXPECT_EQ(cli(dir, "sdp --theta 50 --out x.svg --in " + (cohort / "saline-01_pre.csv").string()).code, 2);
  EXPECT_EQ(cli(dir, "sdp --column hip --out x.svg --in " + (cohort / "saline-01_pre.json").string()).code, 1);
}

TEST(Cli, StatsTests) {
  oracle::TempDir dir("cli-stats");
  const auto a = dir.path() / "a.txt";
  const auto b = dir.path() / "b.txt";
  const auto c = dir.path() / "c.txt";
  write_lines(a, {1, 2, 3, 4, 5});
  write_lines(b, {6, 7, 8, 9, 10});
  write_lines(c, oracle::normals(40, 3));
  const std::string ab = " --groups " + a.string() + " " + b.string();

  auto r = cli(dir, "stats --test mwu" + ab);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["statistic"], 0.0);
  EXPECT_NEAR(j["p_value"].get<double>(), 2.0 / 252.0, 1e-12);

  r = cli(dir, "stats --test mwu --alternative less" + ab);
  EXPECT_NEAR(json::parse(r.out)["p_value"].get<double>(), 1.0 / 252.0, 1e-12);

  r = cli(dir, "stats --test t --equal-variance" + ab);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["statistic"].get<double>(), -5.0, 1e-12);

  r = cli(dir, "stats --test anova --groups " + a.string() + " " + b.string() + " " + c.string());
  ASSERT_EQ(r.code, 0) << r.err;
  j = json::parse(r.out);
  EXPECT_EQ(j["pairwise"].size(), 3u);

  r = cli(dir, "stats --test ks --groups " + c.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(json::parse(r.out)[0]["p_value"].get<double>(), 0.05);

  EXPECT_EQ(cli(dir, "stats --test t --groups " + a.string()).code, 2);
  EXPECT_EQ(cli(dir, "stats --test chi2" + ab).code, 2);
  EXPECT_EQ(cli(dir, "stats --test t --alternative sideways" + ab).code, 2);
}

TEST(Cli, PipelineExitCodes) {
  oracle::TempDir dir("cli-pipeline");
  const auto cohort = dir.path() / "cohort";
  const auto cfg = dir.path() / "cfg.json";
  std::ofstream(cfg) << R"({"window_seconds": 2.0})";
  ASSERT_EQ(cli(dir, "synth --profile morphine --subjects 1 --duration 20 --out " + cohort.string()).code, 0);

  auto r = cli(dir, "--config " + cfg.string() + " pipeline --cohort " + cohort.string() + " --out " +
                        (dir.path() / "ok").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy KLD2D"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir.path() / "ok" / "report.json"));

  std::ofstream(cohort / "morphine-01_post.csv", std::ios::app) << "oops\n";
  r = cli(dir, "--config " + cfg.string() + " pipeline --cohort " + cohort.string() + " --out " +
                   (dir.path() / "bad").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("morphine-01_post.csv:"), std::string::npos) << r.out;

  std::ofstream(cfg) << R"({"window_secs": 2.0})";
  r = cli(dir, "--config " + cfg.string() + " pipeline --cohort " + cohort.string() + " --out " +
                   (dir.path() / "x").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown config key"), std::string::npos) << r.err;
}

TEST(Cli, CalibrateWritesThresholds) {
  oracle::TempDir dir("cli-calibrate");
  const auto cohort = dir.path() / "cohort";
  ASSERT_EQ(cli(dir, "synth --profile all --subjects 1 --duration 30 --out " + cohort.string()).code, 0);
  const auto out = dir.path() / "th.json";
  const auto r = cli(dir, "calibrate --cohort " + cohort.string() + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(out));
  EXPECT_TRUE(j.contains("food_2d"));
  EXPECT_LT(j["food_2d"].get<double>(), 5.0);
}
