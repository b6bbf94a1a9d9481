#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
    const std::string cmd = std::string("\"") + PSBRM_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("psbrm_cli_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path write_file(const fs::path& p, const std::string& text)
{
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p;
}

const std::string kConfig = std::string(PSBRM_SOURCE_DIR) + "/configs/benchmark_experiments.json";

} // namespace

TEST(Cli, CompareAndAblateAreReproducible)
{
    const fs::path a = scratch("repro_a");
    const fs::path b = scratch("repro_b");
    for (const char* cmd : {"compare", "ablate"}) {
        ASSERT_EQ(run(std::string(cmd) + " --config " + kConfig + " --out " + a.string() + " --quiet"), 0);
        ASSERT_EQ(run(std::string(cmd) + " --config " + kConfig + " --out " + b.string() + " --quiet"), 0);
    }
    int csvs = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv")
            continue;
        ++csvs;
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    }
    EXPECT_EQ(csvs, 4 + 5);
}

TEST(Cli, SubcommandsWriteArtifacts)
{
    const fs::path out = scratch("all");
    EXPECT_EQ(run("solve --out " + out.string() + " --quiet"), 0);
    EXPECT_EQ(run("cp-curve --out " + out.string() + " --quiet"), 0);
    EXPECT_EQ(run("fixed-point --out " + out.string() + " --quiet"), 0);
    EXPECT_EQ(run("probe-projection --out " + out.string() + " --quiet"), 0);
    for (const char* f : {"solve_p80.csv", "cp_curve.csv", "fixed_point.csv", "probe_p80.csv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
        EXPECT_TRUE(fs::exists((out / f).replace_extension(".meta.json"))) << f;
        EXPECT_TRUE(fs::exists((out / f).replace_extension(".plot.py"))) << f;
    }
    const auto meta = nlohmann::json::parse(slurp(out / "cp_curve.meta.json"));
    EXPECT_NEAR(meta["p_bar"].get<double>(), 48.446, 1e-3);
    EXPECT_NE(slurp(out / "fixed_point.csv").find("state,action,q_star"), std::string::npos);
}

TEST(Cli, SeedFlagOverridesConfig)
{
    const fs::path out = scratch("seed");
    ASSERT_EQ(run("compare --config " + kConfig + " --seed 5 --out " + out.string() + " --quiet"), 0);
    const auto meta = nlohmann::json::parse(slurp(out / "compare_psbrm_p80.meta.json"));
    EXPECT_EQ(meta["seeds"]["phi_seed"], 5);
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch("codes");
    EXPECT_EQ(run("--bogus-flag"), 2);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("compare --config " + write_file(dir / "unknown.json", "{\"nope\": 1}").string()), 2);
    EXPECT_EQ(run("compare --config " + write_file(dir / "broken.json", "{ not json").string()), 2);
    EXPECT_EQ(run("compare --config " + (dir / "missing.json").string()), 4);
    EXPECT_EQ(run("compare --out /proc/psbrm_cannot_write"), 4);
    // One oracle sweep cannot reach the tolerance.
    EXPECT_EQ(run("fixed-point --out " + dir.string() + " --config " +
                  write_file(dir / "short.json", "{\"oracle\": {\"tol\": 1e-10, \"max_iter\": 1}}").string()),
              3);
}
