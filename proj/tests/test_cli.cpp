#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pseudomode/cli/commands.hpp"

using namespace pseudomode;
using namespace pseudomode::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pseudomode_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int status;
  std::string out, err;
};

/// Runs the binary inside `dir` with `args`, config text written to dir/config.json.
Run run_cli(const fs::path& dir, const std::string& args, const std::string& config) {
  std::ofstream(dir / "config.json") << config;
  const std::string cmd = "cd " + dir.string() + " && " + std::string(PSEUDOMODE_CLI_PATH) + " " + args + " --config " + (dir / "config.json").string() +
                          " > " + (dir / "stdout.txt").string() + " 2> " + (dir / "stderr.txt").string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(dir / "stdout.txt"), slurp(dir / "stderr.txt")};
}

json error_of(const Run& r) { return json::parse(r.err).at("error"); }

const char* kAiry = R"({"operator": {"name": "complex-airy"}, "domain": [-2, 2])";

std::string with_airy(const std::string& rest) { return std::string(kAiry) + ", " + rest + "}"; }

}  // namespace

TEST(ParseConfig, DefaultsAndBuiltinOperator) {
  const auto c = parse_config(json::parse(R"({"operator": {"name": "advection-exit"}})"));
  EXPECT_EQ(c.operator_name, "advection-exit");
  EXPECT_EQ(c.n, 1);
  EXPECT_EQ(c.h_sweep, default_h_sweep());
  EXPECT_EQ(c.output, "out");
  EXPECT_FALSE(c.mode.has_value());
}

TEST(ParseConfig, CustomPolynomialOperator) {
  const auto c = parse_config(json::parse(
      R"({"operator": {"a": [1], "b": [0], "c": [0, [0, 1]]}, "domain": [-1, 1]})"));
  EXPECT_EQ(c.operator_name, "custom");
  EXPECT_NEAR(std::abs(principal_symbol(c.operator_field(), {0.5, 0.0}) - cplx(0.0, 0.5)), 0.0, 1e-15);
}

TEST(ParseConfig, RejectsUnknownKeysAtEveryLevel) {
  EXPECT_THROW(parse_config(json::parse(R"({"operator": {"name": "complex-airy"}, "mdoe": {}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"operator": {"name": "complex-airy", "size": 3}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("mode": {"u": 0, "xi": -1, "h": 0.1, "order": 2})"))),
               ConfigError);
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("fbi": {"s": {"lo": 0, "hi": 1, "count": 3, "step": 1}})"))),
               ConfigError);
}

TEST(ParseConfig, RejectsOutOfRangeValues) {
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("mode": {"u": 0, "xi": -1, "h": 0})"))), ConfigError);
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("mode": {"u": 0, "xi": -1, "h": 1.5})"))), ConfigError);
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("n": -1)"))), ConfigError);
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("fbi": {"kappa": [0, 1]})"))), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"operator": {"name": "complex-airy"}, "domain": [1, -1]})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"operator": {"name": "airy"}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(with_airy(R"("mode": {"u": 0, "xi": "minus one", "h": 0.1})"))), ConfigError);
}

TEST(ParseConfig, ComplexValuesAcceptNumberOrPair) {
  const auto c = parse_config(json::parse(
      R"({"operator": {"name": "advection-exit"}, "boundary": {"z": 0.2, "robin": {"coef_deriv": [0, 1], "coef_value": 1}}})"));
  ASSERT_TRUE(c.boundary.has_value());
  EXPECT_EQ(c.boundary->z, cplx(0.2, 0.0));
  EXPECT_EQ(c.boundary->coef_deriv, cplx(0.0, 1.0));
  EXPECT_EQ(c.boundary->coef_value, cplx(1.0, 0.0));
}

TEST(SweepFit, RoundoffResidualsAreFlaggedExact) {
  EXPECT_TRUE(cli::detail::at_roundoff({0.0, 0.0, 0.0, 0.0}));
  EXPECT_TRUE(cli::detail::at_roundoff({3e-16, 1e-15, 0.0, 2e-14}));
  EXPECT_FALSE(cli::detail::at_roundoff({2.8e-7, 1.4e-12, 1.7e-22, 2e-41}));
}

TEST(Cli, HelpExitsZero) {
  const auto dir = scratch("help");
  EXPECT_EQ(run_cli(dir, "mode --help", with_airy(R"("n": 0)")).status, 0);
}

TEST(Cli, ConfigErrorsExitTwoWithJsonOnStderr) {
  const auto dir = scratch("config_errors");
  const auto unknown = run_cli(dir, "mode", with_airy(R"("mode": {"u": 0, "xi": -1, "h": 0.1, "colour": 1})"));
  EXPECT_EQ(unknown.status, 2);
  EXPECT_EQ(error_of(unknown).at("kind"), "config");
  EXPECT_EQ(error_of(unknown).at("exit"), 2);
  EXPECT_NE(error_of(unknown).at("message").get<std::string>().find("colour"), std::string::npos);

  EXPECT_EQ(run_cli(dir, "mode", "{not json").status, 2);
  EXPECT_EQ(run_cli(dir, "region", with_airy(R"("n": 0)")).status, 2);
  EXPECT_EQ(run_cli(dir, "mode --threads 0", with_airy(R"("n": 0)")).status, 2);
  EXPECT_EQ(run_cli(dir, "transmogrify", with_airy(R"("n": 0)")).status, 2);

  const std::string missing = std::string(PSEUDOMODE_CLI_PATH) + " mode --config " + (dir / "absent.json").string() +
                              " 2> " + (dir / "stderr.txt").string();
  const int raw = std::system(missing.c_str());
  EXPECT_EQ(WEXITSTATUS(raw), 2);
  EXPECT_EQ(json::parse(slurp(dir / "stderr.txt")).at("error").at("kind"), "config");
}

TEST(Cli, PreconditionErrorsExitThree) {
  const auto dir = scratch("precondition");
  const auto outside = run_cli(dir, "mode", with_airy(R"("mode": {"u": 0, "xi": 1, "h": 0.05})"));
  EXPECT_EQ(outside.status, 3);
  EXPECT_EQ(error_of(outside).at("kind"), "precondition");
  EXPECT_EQ(error_of(outside).at("code"), "not_in_omega");

  const auto parabola = run_cli(dir, "boundary", R"({"operator": {"name": "advection-exit"}, "boundary": {"z": -1}})");
  EXPECT_EQ(parabola.status, 3);
  EXPECT_EQ(error_of(parabola).at("kind"), "precondition");
}

TEST(Cli, NumericFailureExitsFour) {
  const auto dir = scratch("numeric");
  const auto r = run_cli(dir, "fbi", with_airy(R"("fbi": {
      "h": [0.1], "s": {"lo": -1, "hi": 1, "count": 3}, "t": [1e-9], "functions": 0,
      "orthogonality": {"U": {"u": {"lo": -1.6, "hi": -1.0, "count": 4}, "xi": {"lo": -1.5, "hi": -0.5, "count": 4}},
                        "V": {"u": {"lo": 1.0, "hi": 1.6, "count": 4}, "xi": {"lo": -1.5, "hi": -0.5, "count": 4}},
                        "h": {"lo": 0.0005, "hi": 0.001, "count": 2}}})"));
  EXPECT_EQ(r.status, 4);
  EXPECT_EQ(error_of(r).at("kind"), "numeric");
}

TEST(Cli, ModeWritesSamplesAndResidualTriple) {
  const auto dir = scratch("mode");
  const auto r = run_cli(dir, "mode --out " + (dir / "o").string(), with_airy(R"("mode": {"u": 0, "xi": -1, "h": 0.0625})"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(slurp(dir / "o" / "mode.json"));
  EXPECT_EQ(report.at("kind"), "interior");
  EXPECT_LT(report.at("residual").at("rL").get<double>(), 1e-3);
  EXPECT_EQ(json::parse(r.out), report);
  const std::string csv = slurp(dir / "o" / "mode_samples.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,re_f,im_f,re_residual,im_residual");
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), report.at("samples").get<std::size_t>() + 1);
}

TEST(Cli, OutputDirectoryDefaultsToConfig) {
  const auto dir = scratch("output_key");
  const auto target = dir / "from_config";
  const auto r = run_cli(dir, "mode", with_airy(R"("output": ")" + target.string() +
                                                R"(", "mode": {"kind": "rough", "u": 0, "xi": -1, "h": 0.0625})"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(target / "mode.json"));
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto dir = scratch("determinism");
  const std::string config = with_airy(R"(
      "h_sweep": [0.0625, 0.03125, 0.015625, 0.0078125],
      "region": {"u": {"lo": -1, "hi": 1, "count": 9}, "xi": {"lo": -2, "hi": 2, "count": 9}},
      "sweep": {"kinds": ["interior", "gaussian"], "orders": [0, 1]},
      "psgrid": {"m": 120, "h": 0.03125, "re": {"lo": -1, "hi": 1, "count": 3}, "im": {"lo": -1, "hi": 1, "count": 3},
                 "cloud": {"u": {"lo": -0.5, "hi": 0.5, "count": 2}, "xi": {"lo": -1, "hi": -0.5, "count": 2}}},
      "fbi": {"h": [0.1], "s": {"lo": -3, "hi": 3, "count": 7}, "t": [1e-9], "functions": 3})");
  for (const char* cmd : {"region", "sweep", "psgrid", "fbi"}) {
    for (const char* tag : {"a", "b"}) {
      const auto r = run_cli(dir, std::string(cmd) + " --threads 2 --out " + (dir / tag).string(), config);
      ASSERT_EQ(r.status, 0) << cmd << ": " << r.err;
    }
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto twin = dir / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(twin)) << twin;
    EXPECT_EQ(slurp(entry.path()), slurp(twin)) << entry.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 14u);
}

TEST(Cli, EmptyZGridGivesEmptyResolventFile) {
  const auto dir = scratch("empty_grid");
  const auto r = run_cli(dir, "psgrid --out " + (dir / "o").string(),
                         with_airy(R"("psgrid": {"m": 100, "re": {"lo": 0, "hi": 1, "count": 0},
                                                "im": {"lo": 0, "hi": 1, "count": 0}})"));
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "o" / "resolvent.csv"));
  EXPECT_EQ(fs::file_size(dir / "o" / "resolvent.csv"), 0u);
  EXPECT_EQ(json::parse(r.out).at("cells"), 0);
}

TEST(Cli, ResolventIsTinyOnTheSymbolCloud) {
  const auto dir = scratch("cloud");
  const auto r = run_cli(dir, "psgrid --out " + (dir / "o").string(),
                         with_airy(R"("psgrid": {"m": 600, "h": 0.0078125,
                                                "re": {"lo": 0, "hi": 1, "count": 0}, "im": {"lo": 0, "hi": 1, "count": 0},
                                                "cloud": {"u": {"lo": -0.5, "hi": 0.5, "count": 3},
                                                          "xi": {"lo": -1, "hi": -0.5, "count": 3}}})"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(r.out);
  EXPECT_EQ(report.at("cloud_points"), 9);
  EXPECT_LT(report.at("cloud_s_min_max").get<double>(), 1e-3);
  EXPECT_NE(slurp(dir / "o" / "psgrid.gp").find("symbol_cloud.csv"), std::string::npos);
}

TEST(Cli, PsgridPlotOverlaysParabolaForExitOperators) {
  const auto dir = scratch("parabola");
  const auto r = run_cli(dir, "psgrid --out " + (dir / "o").string(),
                         R"({"operator": {"name": "advection-exit"},
                             "psgrid": {"m": 80, "h": 0.1, "re": {"lo": 0, "hi": 1, "count": 2}, "im": {"lo": 0, "hi": 1, "count": 2}}})");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "o" / "parabola.csv"));
  EXPECT_NE(slurp(dir / "o" / "psgrid.gp").find("parabola.csv"), std::string::npos);
}

TEST(Cli, BoundaryModeSatisfiesRobinCondition) {
  const auto dir = scratch("boundary");
  const auto r = run_cli(dir, "boundary --out " + (dir / "o").string(),
                         R"({"operator": {"name": "advection-exit"},
                             "boundary": {"z": [0.2, 0], "robin": {"coef_deriv": 1, "coef_value": 1}}})");
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(r.out);
  EXPECT_TRUE(report.at("exit_condition").get<bool>());
  EXPECT_LT(report.at("bc_residual").get<double>(), 1e-12);
  EXPECT_EQ(report.at("roots").size(), 2u);
}

TEST(Cli, SweepFitsRecoverHalfOrderForRoughModes) {
  const auto dir = scratch("sweep");
  const auto r = run_cli(dir, "sweep --out " + (dir / "o").string(),
                         with_airy(R"("h_sweep": [0.0625, 0.03125, 0.015625, 0.0078125], "sweep": {"kinds": ["rough"]})"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto fits = json::parse(r.out).at("fits");
  ASSERT_EQ(fits.size(), 3u);
  for (const auto& f : fits) EXPECT_NEAR(f.at("slope").get<double>(), 0.5, 0.15) << f.at("quantity");
}

TEST(Cli, EvolveReportsBoundAndBudget) {
  const auto dir = scratch("evolve");
  const auto r = run_cli(dir, "evolve --out " + (dir / "o").string(),
                         with_airy(R"("evolve": {"m": 200, "modes": [[-0.4, -1.0], [0.4, -1.0], [0.0, -0.7]]})"));
  ASSERT_EQ(r.status, 0) << r.err;
  const auto report = json::parse(r.out);
  EXPECT_TRUE(report.at("bound_ok").get<bool>());
  EXPECT_TRUE(report.at("budget_ok").get<bool>());
  EXPECT_EQ(report.at("columns"), 3);
}
