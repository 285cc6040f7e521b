#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / ("hdc_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args) {
  const auto err_path = scratch() / "stderr.txt";
  const std::string cmd = std::string(HDC_CLI_PATH) + " " + args + " 2> " + err_path.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

std::string data(const char* name) { return (fs::path(HDC_DATA_DIR) / name).string(); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Cli, PriceAtIndexSpot) {
  const auto r = cli("price --spot 6025.99 --strike 6000 --maturity 0.0082");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("strike,price,p1,p2\n", 0), 0u);
  EXPECT_EQ(count_lines(r.out), 2u);
  EXPECT_EQ(cli("price --spot 6025.99 --strike 6000 --maturity 0.0082").out, r.out);
}

TEST(Cli, PriceJsonWithBlackScholes) {
  const auto r = cli("price --strike 90,100,110 --bs-vol 0.2 --format json");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_TRUE(j.contains("quotes"));
  ASSERT_EQ(j.at("quotes").size(), 3u);
  EXPECT_TRUE(j.at("quotes")[0].contains("bs_price"));
}

TEST(Cli, ZeroStrikeIsValidationError) {
  const auto r = cli("price --strike 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--strike"), std::string::npos) << r.err;
}

TEST(Cli, ValidationExitCodes) {
  EXPECT_EQ(cli("no-such-command").code, 2);
  EXPECT_EQ(cli("mc-check --paths 10").code, 2);
  EXPECT_EQ(cli("calibrate --chain " + data("sample_chain.csv") + " --method simplex").code, 2);
  EXPECT_EQ(cli("calibrate --chain /nonexistent/chain.csv").code, 2);
  EXPECT_EQ(cli("price --nodes 8").code, 2);
  EXPECT_EQ(cli("price --rho 1.5").code, 2);
}

TEST(Cli, NumericalExitCode) {
  // A pass band of essentially zero standard errors cannot hold.
  const auto r = cli("mc-check --paths 2000 --steps 10 --n-se 1e-9");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(cli("price --strike 150 --maturity 0.00274 --nodes 64 --upper-limit 5").code, 3);
}

TEST(Cli, IoExitCode) {
  const auto bad = scratch() / "bad_chain.csv";
  std::ofstream(bad) << "strike,maturity_days,last_price\n100,30,abc\n";
  std::ofstream(scratch() / "bad_chain.meta.json") << R"({"spot": 100, "rate": 0.0, "as_of": "2025-01-02"})";
  EXPECT_EQ(cli("calibrate --chain " + bad.string()).code, 4);
  // A regular file where a directory is expected.
  const auto blocker = scratch() / "blocker";
  std::ofstream(blocker) << "x";
  EXPECT_EQ(cli("calibrate --chain " + data("sample_chain.csv") + " --max-gens 1 --out " + (blocker / "r.json").string()).code, 4);
}

TEST(Cli, MonteCarloCheckPasses) {
  const auto r = cli("mc-check --paths 20000 --steps 50");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 6u);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(cli("mc-check --paths 20000 --steps 50").out, r.out);
}

TEST(Cli, CalibrateBundledChain) {
  const auto curve = scratch() / "fit.csv";
  const auto r = cli("-q calibrate --chain " + data("sample_chain.csv") +
                     " --de-tol 1e-3 --max-gens 1000 --curve " + curve.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j.at("converged").get<bool>());
  EXPECT_LT(j.at("objective").get<double>(), 1e-2);
  EXPECT_EQ(j.at("method"), "de");
  const auto csv = slurp(curve);
  EXPECT_EQ(csv.rfind("strike,maturity_days,series,value\n", 0), 0u);
  EXPECT_NE(csv.find(",market,"), std::string::npos);
  EXPECT_NE(csv.find(",heston,"), std::string::npos);
  EXPECT_EQ(count_lines(csv), 1u + 2u * 20u);
}

TEST(Cli, CalibrateIsDeterministic) {
  const std::string args = "-q calibrate --chain " + data("sample_chain.csv") + " --max-gens 5 --pop-size 10";
  const auto a = cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(cli(args).out, a.out);
  EXPECT_EQ(cli("--threads 1 " + args).out, a.out);
}

TEST(Cli, SurrogateWorkflow) {
  const auto grid = scratch() / "grid.csv";
  const auto g = cli("-q surrogate gen --scheme grid --grid-points 3 --kappa-bounds 1,3 --theta-bounds 0.02,0.08 "
                     "--sigma-bounds 0.1,0.6 --rho-bounds -0.7,-0.3 --v0-bounds 0.02,0.08 --maturity-range 0.2,0.6 "
                     "--moneyness-range -0.2,0.2 --out " + grid.string());
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(count_lines(slurp(grid)), 1u + 2187u);

  const auto uniform = scratch() / "uniform.csv";
  ASSERT_EQ(cli("-q surrogate gen --samples 400 --out " + uniform.string()).code, 0);
  const auto net = scratch() / "net.json";
  const auto t = cli("surrogate train --epochs 3 --data " + uniform.string() + " --out " + net.string());
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(nlohmann::json::parse(t.out).at("validation_rmse").is_number());
  EXPECT_TRUE(fs::exists(net));

  const auto c = cli("-q surrogate calibrate --chain " + data("sample_chain.csv") + " --network " + net.string() +
                     " --max-gens 3");
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_TRUE(nlohmann::json::parse(c.out).contains("extrapolation_warnings"));

  EXPECT_EQ(cli("surrogate calibrate --chain " + data("sample_chain.csv") + " --network /nonexistent/net.json").code,
            2);
}

TEST(Cli, PipelineReportSchema) {
  const std::string base = "-q pipeline --chain " + data("perturbed_chain.csv") +
                           " --max-gens 20 --pop-size 16 --pan-epochs 300 --ccn-epochs 300";
  const auto curves = scratch() / "curves.csv";
  const auto a = cli(base + " --curves " + curves.string());
  ASSERT_EQ(a.code, 0) << a.err;
  const auto j = nlohmann::json::parse(a.out);
  for (const char* method : {"traditional", "deep_learning"})
    for (const char* split : {"train", "test"})
      for (const char* metric : {"rmse", "mae", "mre"}) EXPECT_TRUE(j.at(method).at(split).at(metric).is_number());
  EXPECT_EQ(slurp(curves).rfind("strike,series,value\n", 0), 0u);

  const auto pan_path = scratch() / "pan_a.json";
  const auto pan_b = scratch() / "pan_b.json";
  ASSERT_EQ(cli("--seed 1 pan-train --chain " + data("perturbed_chain.csv") + " --epochs 20 --out " +
                pan_path.string()).code, 0);
  ASSERT_EQ(cli("--seed 2 pan-train --chain " + data("perturbed_chain.csv") + " --epochs 20 --out " +
                pan_b.string()).code, 0);
  EXPECT_NE(slurp(pan_path), slurp(pan_b));

  const auto b = cli("--seed 7 " + base);
  ASSERT_EQ(b.code, 0) << b.err;
  const auto jb = nlohmann::json::parse(b.out);
  EXPECT_NE(j.at("run").at("split_seed"), jb.at("run").at("split_seed"));
  EXPECT_EQ(j.at("traditional").size(), jb.at("traditional").size());
}

TEST(Cli, MetricsCommand) {
  const auto f = scratch() / "m.csv";
  std::ofstream(f) << "model,market\n2,1\n4,3\n";
  const auto r = cli("metrics --file " + f.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j.at("rmse").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("mre").get<double>(), 2.0 / 3.0);
  EXPECT_EQ(cli("metrics --file " + f.string() + " --model-column heston").code, 2);
}

TEST(Cli, HelpListsEveryCommand) {
  const auto r = cli("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* c : {"price", "mc-check", "calibrate", "surrogate", "pan-train", "pipeline", "metrics"})
    EXPECT_NE(r.out.find(c), std::string::npos) << c;
}
