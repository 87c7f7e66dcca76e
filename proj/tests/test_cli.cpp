#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "relcrawl/integrate.hpp"
#include "relcrawl/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("relcrawl_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(RELCRAWL_CLI_PATH) + " " + args + " > " + (log / "stdout.txt").string() +
                          " 2> " + (log / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, CertifyBaselineConfig) {
  const fs::path d = scratch("certify");
  EXPECT_EQ(run("certify --out " + d.string(), d), 0);
  const json j = read_json(d / "certify.json");
  EXPECT_EQ(j["verdict"], "robustly_stable");
  EXPECT_LT(j["spectral_abscissa"].get<double>(), 0.0);
}

TEST(Cli, CertifyWithoutViscosity) {
  const fs::path d = scratch("certify_marginal");
  const fs::path cfg = write_config(d, R"({"nu_s": 0, "nu_ns": 0, "nu_db": 0})");
  EXPECT_EQ(run("certify --config " + cfg.string() + " --out " + d.string(), d), 1);
  EXPECT_EQ(read_json(d / "certify.json")["verdict"], "marginal");
}

TEST(Cli, CertifyDegenerateTriangle) {
  const fs::path d = scratch("certify_degenerate");
  const fs::path cfg = write_config(d, R"({"rest_lengths": [1, 1, 2]})");
  EXPECT_EQ(run("certify --config " + cfg.string() + " --out " + d.string(), d), 2);
  EXPECT_NE(slurp(d / "stderr.txt").find("triangle"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyIsRejected) {
  const fs::path d = scratch("bad_key");
  const fs::path cfg = write_config(d, R"({"kapa_s": 10})");
  EXPECT_EQ(run("certify --config " + cfg.string() + " --out " + d.string(), d), 2);
}

TEST(Cli, SweepWritesTable) {
  const fs::path d = scratch("sweep");
  EXPECT_EQ(run("sweep --out " + d.string(), d), 0);
  std::ifstream in(d / "sweep.csv");
  const auto rows = relcrawl::read_scaling_csv(in);
  ASSERT_EQ(rows.size(), 6u);
  const double table[] = {0.17870, 0.04666, 0.01172, 0.002934, 0.000734, 0.000183};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(rows[i].delta_x / table[i], 1.0, 0.05) << i;
  EXPECT_TRUE(std::isnan(rows[5].p));
  EXPECT_EQ(slurp(d / "stdout.txt"), slurp(d / "sweep.csv"));
}

TEST(Cli, SweepSingleAndUnsorted) {
  const fs::path d = scratch("sweep_small");
  fs::path cfg = write_config(d, R"({"epsilons": [0.25]})");
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --out " + d.string(), d), 0);
  std::ifstream in(d / "sweep.csv");
  const auto rows = relcrawl::read_scaling_csv(in);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(std::isnan(rows[0].p));

  cfg = write_config(d, R"({"epsilons": [0.125, 0.25]})");
  EXPECT_EQ(run("sweep --config " + cfg.string() + " --out " + d.string(), d), 0);
  EXPECT_NE(slurp(d / "stderr.txt").find("sorted"), std::string::npos);
  std::ifstream in2(d / "sweep.csv");
  const auto rows2 = relcrawl::read_scaling_csv(in2);
  ASSERT_EQ(rows2.size(), 2u);
  EXPECT_EQ(rows2[0].epsilon, 0.25);
}

TEST(Cli, SimulateWithPlots) {
  const fs::path d = scratch("simulate");
  EXPECT_EQ(run("simulate --epsilon 0.5 --emit-plots --out " + d.string(), d), 0);
  std::ifstream in(d / "shifts.csv");
  const relcrawl::CsvTable shifts = relcrawl::read_csv(in);
  ASSERT_EQ(shifts.rows.size(), 20u);
  EXPECT_NEAR(shifts.number(19, shifts.column("shift")), 0.0466, 0.05 * 0.0466);
  for (const char* f : {"trajectory.csv", "plots/x.dat", "plots/z.dat", "plots/path.dat", "plots/plot.gp"})
    EXPECT_TRUE(fs::exists(d / f)) << f;
}

TEST(Cli, SimulateUnforcedIsFlat) {
  const fs::path d = scratch("simulate_flat");
  EXPECT_EQ(run("simulate --epsilon 0 --out " + d.string(), d), 0);
  std::ifstream in(d / "trajectory.csv");
  const relcrawl::CsvTable t = relcrawl::read_csv(in);
  const int x3 = t.column("x3");
  for (std::size_t r = 0; r < t.rows.size(); ++r) EXPECT_NEAR(t.number(r, x3), t.number(0, x3), 1e-9);
}

TEST(Cli, CycleSummaryAndSamples) {
  const fs::path d = scratch("cycle");
  EXPECT_EQ(run("cycle --epsilon 0.5 --out " + d.string(), d), 0);
  const json j = read_json(d / "cycle.json");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_NEAR(j["delta_x"].get<double>(), 0.04666, 0.05 * 0.04666);
  std::ifstream in(d / "cycle.csv");
  EXPECT_EQ(relcrawl::read_csv(in).rows.size(), 65u);
}

TEST(Cli, PerturbationReport) {
  const fs::path d = scratch("perturbation");
  EXPECT_EQ(run("perturbation --out " + d.string(), d), 0);
  const json j = read_json(d / "perturbation.json");
  EXPECT_LE(std::abs(j["delta_x_first_order"].get<double>()), 1e-8);
  EXPECT_NEAR(j["nonlinear_ratio"].get<double>(), 1.0, 0.1);

  EXPECT_EQ(run("perturbation --freeze-damping --out " + d.string(), d), 0);
  EXPECT_EQ(read_json(d / "perturbation.json")["delta_x_second_order"].get<double>(), 0.0);
}

TEST(Cli, TetradDemo) {
  const fs::path d = scratch("demo3d");
  EXPECT_EQ(run("demo3d --out " + d.string(), d), 0);
  const json j = read_json(d / "demo3d.json");
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_LT(j["max_multiplier"].get<double>(), 1.0);
  EXPECT_LE(j["two_period_defect"].get<double>(), 1e-5);
  EXPECT_GT(std::abs(j["delta_phi"].get<double>()), 0.0);
  EXPECT_TRUE(fs::exists(d / "paths.csv"));
}

TEST(Cli, SeededRunsAreByteIdentical) {
  const fs::path a = scratch("repro_a"), b = scratch("repro_b");
  const fs::path cfg = write_config(a, R"({"seed_perturbation": 0.01, "epsilon": 0.25})");
  EXPECT_EQ(run("cycle --seed 7 --config " + cfg.string() + " --out " + a.string(), a), 0);
  EXPECT_EQ(run("cycle --seed 7 --config " + cfg.string() + " --out " + b.string(), b), 0);
  EXPECT_EQ(slurp(a / "cycle.json"), slurp(b / "cycle.json"));
  EXPECT_EQ(slurp(a / "cycle.csv"), slurp(b / "cycle.csv"));
}

TEST(Cli, MissingSubcommandFails) {
  const fs::path d = scratch("usage");
  EXPECT_NE(run("", d), 0);
  EXPECT_NE(run("certify --profile smooth", d), 0);
}
