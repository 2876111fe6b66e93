#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dopo/commands.hpp"

using namespace dopo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dopo_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DOPO_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig quick(const std::string& name) {
    RunConfig c;
    c.n_points = 128;
    c.output = scratch(name).string();
    c.threads = 2;
    return c;
}

} // namespace

TEST(Config, DefaultsValidate) {
    const RunConfig c = parse_config("{}");
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.model.mu, 1.2);
    EXPECT_EQ(c.n_points, 256u);
}

TEST(Config, UnknownKeysRejected) {
    EXPECT_THROW(parse_config(R"({"modle": {}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"model": {"mu": 1.2, "gamma": 1}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"squeeze": {"lofs": [{"kind": "w2", "sigma": 1}]}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"diffusion": {"simulation": {"steps": 3}}})"), ConfigError);
}

TEST(Config, TypeAndSyntaxErrors) {
    EXPECT_THROW(parse_config(R"({"model": {"mu": "high"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"model": )"), ConfigError);
    EXPECT_THROW(parse_config(R"({"squeeze": {"lofs": {}}})"), ConfigError);
}

TEST(Config, FieldsParsed) {
    const RunConfig c = parse_config(R"({
        "model": {"sigma": 1, "mu": 1.05, "delta1": 2, "kappa": 500},
        "grid": {"n_points": 512, "length": 60},
        "squeeze": {"method": "both", "window": 1.5,
                    "lofs": [{"kind": "gh1", "width_over_dx": 1, "offset_over_dx": 0.15, "mode": "static"}]},
        "simulation": {"n_trajectories": 10, "dt": 0.01},
        "seed": 99, "threads": 3, "output": "x"})");
    EXPECT_EQ(c.model.mu, 1.05);
    EXPECT_EQ(c.model.kappa, 500.0);
    EXPECT_EQ(c.n_points, 512u);
    EXPECT_EQ(c.squeeze.method, "both");
    ASSERT_TRUE(c.squeeze.window.has_value());
    EXPECT_EQ(*c.squeeze.window, 1.5);
    EXPECT_EQ(c.squeeze.lofs.at(0).mode, "static");
    EXPECT_EQ(c.simulation.n_trajectories, 10);
    EXPECT_EQ(c.seed, 99u);
}

TEST(Config, CavityBlockIsReduced) {
    const RunConfig c = parse_config(R"({"cavity": {"gamma0": 1, "gamma1": 1, "g": 1, "delta0": 2,
                                          "pump_amplitude": 2, "regime_threshold": 1}})");
    EXPECT_DOUBLE_EQ(c.model.kappa, 2.0);
    EXPECT_DOUBLE_EQ(c.model.mu, 1.0);
    EXPECT_THROW(parse_config(R"({"cavity": {"delta0": 2, "pump_amplitude": 2}})"), RegimeError);
    EXPECT_THROW(parse_config(R"({"model": {}, "cavity": {"delta0": 50}})"), ConfigError);
}

TEST(Config, ValidationCatchesBadBlocks) {
    auto bad = [](const char* text) {
        const RunConfig c = parse_config(text);
        EXPECT_THROW(c.validate(), ConfigError) << text;
    };
    bad(R"({"grid": {"n_points": 100}})");
    bad(R"({"squeeze": {"method": "guess"}})");
    bad(R"({"squeeze": {"lofs": [{"kind": "gh1", "width_over_dx": 0}]}})");
    bad(R"({"simulation": {"burn_in": 50, "t_end": 40}})");
    bad(R"({"diffusion": {"kappas": [100]}})");
    bad(R"({"model": {"sigma": 0}})");
    bad(R"({"solver": {"initial": "file"}})");
}

TEST(Config, HashIgnoresThreadsAndOutput) {
    RunConfig a, b;
    b.threads = 7;
    b.output = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.model.mu = 1.3;
    EXPECT_NE(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Commands, SolveDsWritesProfileAndManifest) {
    RunConfig c = quick("solve");
    std::ostringstream log;
    const CommandResult r = run_command("solve-ds", c, log);
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(log.str().find("beta^2    1.66332"), std::string::npos) << log.str();
    std::ifstream is(fs::path(c.output) / "ds.csv");
    const DsSolution ds = read_ds_csv(is);
    EXPECT_NEAR(ds.beta_sq, 1.663325, 1e-6);
    const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output) / "manifest.json"));
    EXPECT_EQ(manifest["command"], "solve-ds");
    EXPECT_EQ(manifest["config_hash"], config_hash(c));
    EXPECT_EQ(manifest["outputs"].size(), 1u);
}

TEST(Commands, ThresholdPumpGivesDetuningAsBetaSquared) {
    RunConfig c = quick("threshold");
    c.model.mu = 1.0;
    std::ostringstream log;
    run_command("solve-ds", c, log);
    std::ifstream is(fs::path(c.output) / "ds.csv");
    EXPECT_EQ(read_ds_csv(is).beta_sq, 1.0);
}

TEST(Commands, BelowThresholdIsConfigError) {
    RunConfig c = quick("below");
    c.model.mu = 0.5;
    std::ostringstream log;
    EXPECT_THROW(run_command("solve-ds", c, log), BelowThresholdError);
    EXPECT_TRUE(fs::exists(fs::path(c.output) / "manifest.json"));
}

TEST(Commands, SpectrumTagsUniversalModes) {
    RunConfig c = quick("spectrum");
    std::ostringstream log;
    run_command("spectrum", c, log);
    const std::string csv = slurp(fs::path(c.output) / "spectrum.csv");
    EXPECT_NE(csv.find(",goldstone"), std::string::npos);
    EXPECT_NE(csv.find(",w2"), std::string::npos);
    EXPECT_NE(slurp(fs::path(c.output) / "universal_modes.txt").find("ok"), std::string::npos);
}

TEST(Commands, SpectrumOfHomogeneousBackground) {
    RunConfig c = quick("spectrum_h");
    c.n_points = 32;
    c.solver.initial = "homogeneous";
    c.require_stable = false;
    std::ostringstream log;
    run_command("spectrum", c, log);
    EXPECT_NE(log.str().find("no Goldstone pair"), std::string::npos);
}

TEST(Commands, ModalSqueezeIdealLof) {
    RunConfig c = quick("squeeze_modal");
    std::ostringstream log;
    run_command("squeeze", c, log);
    std::ifstream is(fs::path(c.output) / "squeeze_modal_0.csv");
    std::string line;
    std::getline(is, line);
    std::getline(is, line);
    std::getline(is, line);
    const auto comma = line.find(',');
    EXPECT_EQ(std::stod(line.substr(0, comma)), 0.0);
    EXPECT_NEAR(std::stod(line.substr(comma + 1)), -1.0, 1e-6);
}

TEST(Commands, SmallMonteCarloIsFlagged) {
    RunConfig c = quick("squeeze_mc");
    c.squeeze.method = "both";
    c.simulation.n_trajectories = 10;
    c.simulation.t_end = 8.0;
    c.simulation.burn_in = 2.0;
    c.simulation.lag_window = 2.0;
    std::ostringstream log;
    const CommandResult r = run_command("squeeze", c, log);
    ASSERT_FALSE(r.warnings.empty());
    EXPECT_NE(r.warnings.front().find("standard errors too large"), std::string::npos);
    EXPECT_TRUE(fs::exists(fs::path(c.output) / "agreement.csv"));
    EXPECT_TRUE(fs::exists(fs::path(c.output) / "correlation_0.csv"));
}

TEST(Commands, Figure1RerunIsByteIdentical) {
    RunConfig a = quick("fig1_a"), b = quick("fig1_b");
    std::ostringstream log;
    const CommandResult ra = run_command("figure1", a, log);
    run_command("figure1", b, log);
    for (const auto& f : ra.outputs)
        EXPECT_EQ(slurp(fs::path(a.output) / f), slurp(fs::path(b.output) / f)) << f;
    EXPECT_TRUE(fs::exists(fs::path(a.output) / "plot_figure1.py"));
}

TEST(Commands, DiffusionRunsAcrossKappa) {
    RunConfig c = quick("diffusion");
    c.diffusion.kappas = {50.0, 100.0};
    c.diffusion.simulation.n_trajectories = 4;
    c.diffusion.simulation.t_end = 8.0;
    c.diffusion.t_min = 2.0;
    std::ostringstream log;
    const CommandResult r = run_command("diffusion", c, log);
    EXPECT_TRUE(fs::exists(fs::path(c.output) / "diffusion.csv"));
    EXPECT_FALSE(r.warnings.empty());  // far below 100 trajectories
}

TEST(Cli, ExitCodes) {
    const fs::path out = scratch("cli");
    EXPECT_EQ(run_cli("solve-ds --n-points 64 --out " + out.string()), 0);
    EXPECT_EQ(run_cli("solve-ds --mu 0.5 --out " + out.string()), 2);
    const fs::path cfg = out / "bad.json";
    std::ofstream(cfg) << R"({"grid": {"points": 64}})";
    EXPECT_EQ(run_cli("solve-ds --config " + cfg.string() + " --out " + out.string()), 2);
    EXPECT_NE(run_cli("no-such-command"), 0);
    EXPECT_EQ(run_cli("--help"), 0);
}
