#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "support.hpp"

using namespace qsearch;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"qsearch"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> coarse(const std::string& command, const std::filesystem::path& dir,
                                std::vector<std::string> extra = {}) {
    std::vector<std::string> a{command,        "--out",        dir.string(), "--grid-m",
                               "20",           "--loglr-bound", "30",         "--loglr-points",
                               "121",          "--quad-points", "65",         "--tol",
                               "1e-9"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
}

std::size_t line_count(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override { dir = testing_support::scratch_dir("cli"); }
    void TearDown() override { std::filesystem::remove_all(dir); }
    std::filesystem::path dir;
};

}  // namespace

TEST_F(Cli, SolveWritesBundleAndExportsThenReusesIt) {
    auto r = run_cli(coarse("solve", dir, {"--json"}));
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = Json::parse(r.out);
    EXPECT_FALSE(j["cache_hit"].get<bool>());
    EXPECT_EQ(j["g_at_1_0"].get<double>(), 0.0);
    EXPECT_EQ(j["g_at_0_0"].get<double>(), 1.0);
    const auto hash = j["hash"].get<std::string>();
    EXPECT_TRUE(std::filesystem::exists(dir / "bundles" / (hash + ".json")));
    EXPECT_TRUE(std::filesystem::exists(dir / "bundles" / (hash + ".vr.bin")));
    EXPECT_TRUE(std::filesystem::exists(dir / "solve.config.json"));
    for (const char* f : {"g.csv", "vs.csv", "ac.csv"}) {
        EXPECT_EQ(line_count(dir / "exports" / f), triangular_node_count(20) + 1) << f;
    }

    r = run_cli(coarse("solve", dir, {"--json"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(Json::parse(r.out)["cache_hit"].get<bool>());
    r = run_cli(coarse("solve", dir, {"--json", "--force"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(Json::parse(r.out)["cache_hit"].get<bool>());

    // Different parameters hash to a different bundle.
    r = run_cli(coarse("solve", dir, {"--json", "--c", "0.02"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(Json::parse(r.out)["hash"].get<std::string>(), hash);
}

TEST_F(Cli, ExplicitBundleIsLoadedOrReportedMissing) {
    ASSERT_EQ(run_cli(coarse("solve", dir)).code, 0);
    std::filesystem::path bundle;
    for (const auto& e : std::filesystem::directory_iterator(dir / "bundles")) {
        if (e.path().extension() == ".json") bundle = e.path();
    }
    auto r = run_cli(coarse("regions", dir, {"--bundle", bundle.string()}));
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("reusing bundle"), std::string::npos);
    r = run_cli(coarse("simulate", dir, {"--bundle", (dir / "missing.json").string()}));
    EXPECT_EQ(r.code, 1);
    EXPECT_FALSE(std::filesystem::exists(dir / "missing.json"));
}

TEST_F(Cli, RegionsCountsMatchTheCsv) {
    auto r = run_cli(coarse("regions", dir, {"--json"}));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = Json::parse(r.out);
    EXPECT_EQ(j["nodes"].get<std::size_t>(), triangular_node_count(20));
    EXPECT_GT(j["switch_count"].get<std::size_t>(), 0U);
    EXPECT_GT(j["stop_count"].get<std::size_t>(), 0U);
    EXPECT_EQ(line_count(dir / "exports" / "regions.csv"), triangular_node_count(20) + 1);

    r = run_cli(coarse("regions", dir, {"--json", "--c", "1.5"}));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto e = Json::parse(r.out);
    EXPECT_EQ(e["switch_count"].get<std::size_t>(), 0U);
    EXPECT_EQ(e["stop_count"].get<std::size_t>(), triangular_node_count(20));
}

TEST_F(Cli, SimulateIsDeterministicAcrossWorkers) {
    auto r = run_cli(coarse("simulate", dir, {"--trials", "2000", "--seed", "5"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("mean cost"), std::string::npos);
    const auto first = read_text(dir / "simulate_summary.json");
    EXPECT_EQ(line_count(dir / "exports" / "trials.csv"), 2001U);
    r = run_cli(coarse("simulate", dir, {"--trials", "2000", "--seed", "5", "--workers", "4"}));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_text(dir / "simulate_summary.json"), first);
    const auto j = Json::parse(read_text(dir / "simulate.json"));
    EXPECT_EQ(j["summary"]["n_trials"].get<int>(), 2000);
    EXPECT_EQ(j["config"]["params"]["rng_seed"].get<std::uint64_t>(), 5U);
}

TEST_F(Cli, CompareAndSweepWriteReports) {
    auto r = run_cli(coarse("compare", dir, {"--trials", "1000", "--snr-db", "10"}));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto c = Json::parse(read_text(dir / "compare.json"));
    EXPECT_TRUE(c.contains("savings"));
    EXPECT_TRUE(c.contains("pi_upper"));

    r = run_cli(coarse("sweep", dir, {"--trials", "300", "--snr", "2,8", "--json"}));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = Json::parse(r.out);
    EXPECT_EQ(s["points"].size(), 2U);
    EXPECT_TRUE(s["slope"].is_number());
    EXPECT_EQ(line_count(dir / "exports" / "sweep.csv"), 3U);
}

TEST_F(Cli, UsageAndValueErrors) {
    EXPECT_NE(run_cli({}).code, 0);
    EXPECT_NE(run_cli({"bogus"}).code, 0);
    auto r = run_cli(coarse("solve", dir, {"--snr-db", "3", "--p", "2"}));
    EXPECT_NE(r.code, 0);
    r = run_cli(coarse("solve", dir, {"--pi", "1.5"}));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
    r = run_cli(coarse("simulate", dir, {"--trials", "0"}));
    EXPECT_EQ(r.code, 1);
    r = run_cli(coarse("sweep", dir, {"--snr", "3", "--max-iter", "2"}));
    EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
    const auto env_dir = dir / "from-env";
    setenv(cli::kOutEnv, env_dir.c_str(), 1);
    const auto r = run_cli({"regions", "--grid-m", "20", "--loglr-bound", "30", "--loglr-points",
                            "121", "--quad-points", "65", "--tol", "1e-9"});
    unsetenv(cli::kOutEnv);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(std::filesystem::exists(env_dir / "exports" / "regions.csv"));
}
