#include "robpen/errors.hpp"
#include "robpen/experiment.hpp"

#include <doctest.h>

#include <initializer_list>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace robpen;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("robpen_test_" + name);
    fs::remove_all(p);
    return p;
}

const char* kBias = R"(
[experiment]
type = bias_curve
seed = 3
n_draws = 2000

[model]
beta0 = 1.5

[functionals]
names = ls, lasso, sparse_lts
lambda = 0.1

[grid]
beta0 = -2:2:9
)";

} // namespace

TEST_SUITE("experiment")
{
    TEST_CASE("config parsing")
    {
        const auto c = parse_config(kBias);
        CHECK(c.experiment == ExperimentKind::bias_curve);
        CHECK(c.seed == 3);
        CHECK(c.n_draws == 2000);
        REQUIRE(c.functionals.size() == 3);
        CHECK(c.functionals[0].lambda == 0.0);
        CHECK(c.functionals[1].lambda == 0.1);
        REQUIRE(c.beta0_grid.size() == 9);
        CHECK(c.beta0_grid.front() == -2.0);
        CHECK(c.beta0_grid[4] == 0.0);
        CHECK(c.beta0_grid.back() == 2.0);
    }

    TEST_CASE("strict parsing")
    {
        std::string s = kBias;
        CHECK_THROWS_AS(parse_config(s + "extra = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(s + "[other]\nx = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(std::string(kBias).replace(s.find("sparse_lts"), 10, "lts")), ConfigError);
        CHECK_THROWS_AS(parse_config(std::string(kBias).replace(s.find("-2:2:9"), 6, "")), ConfigError);
        CHECK_THROWS_AS(parse_config(std::string(kBias).replace(s.find("n_draws = 2000"), 14, "n_draws = 2e3")),
                        ConfigError);
        CHECK_THROWS_AS(parse_config("[model]\nbeta0 = 1\n"), ConfigError);
        // keys of other experiments are rejected
        CHECK_THROWS_AS(parse_config(s + "[grid]\nn = 100\n"), ConfigError);
        CHECK_THROWS_AS(parse_config(std::string(kBias).replace(s.find("seed = 3"), 8, "replicates = 3")),
                        ConfigError);
    }

    TEST_CASE("csv numbers")
    {
        CHECK(csv_number(0.1) == "0.10000000000000001");
        CHECK(csv_number(-2.0) == "-2");
        CHECK(csv_number(NAN) == "nan");
    }

    TEST_CASE("bias curve run and reproducibility")
    {
        const auto c = parse_config(kBias);
        const auto a = scratch("bias_a");
        const auto b = scratch("bias_b");
        const auto rep = run_experiment(c, a);
        CHECK(rep.files.size() == 3);
        run_experiment(c, b);
        for (const auto& f : rep.files)
            CHECK(slurp(a / f) == slurp(b / f));
        const auto lasso = slurp(a / "lasso.csv");
        CHECK(lasso.rfind("param,value,stderr\n", 0) == 0);
        CHECK(lasso.find("\n2,-0.10000000000000009,0\n") != std::string::npos);
        const auto ls = slurp(a / "ls.csv");
        CHECK(ls.find("\n-1,0,0\n") != std::string::npos);
        const auto manifest = slurp(a / "manifest.txt");
        for (const char* key : {"seed=3\n", "n_draws=2000\n", "experiment=bias_curve\n", "eigen_version=",
                                "boost_version=", "robpen_version=", "wall_time_seconds="})
            CHECK(manifest.find(key) != std::string::npos);
        CHECK_THROWS_AS(run_experiment(c, a), ConfigError);
        fs::remove_all(a);
        fs::remove_all(b);
    }

    TEST_CASE("lasso influence surface at beta0 = 0 is zero")
    {
        const auto c = parse_config(R"(
[experiment]
type = if_surface
[model]
beta0 = 0
[functionals]
names = lasso
lambda = 0.1
[grid]
contamination = -10:10:41
)");
        const auto dir = scratch("if_zero");
        run_experiment(c, dir);
        std::istringstream is(slurp(dir / "lasso.csv"));
        std::string line;
        std::getline(is, line);
        CHECK(line == "x0,y0,value");
        int rows = 0;
        while (std::getline(is, line)) {
            CHECK(line.substr(line.rfind(',') + 1) == "0");
            ++rows;
        }
        CHECK(rows == 41 * 41);
        fs::remove_all(dir);
    }

    TEST_CASE("failed runs leave no output")
    {
        // squared influence values overflow
        const auto c = parse_config(R"(
[experiment]
type = asv_curve
n_draws = 1000
[model]
beta0 = 1
sigma = 1e200
[functionals]
names = ls
[grid]
lambda = 0
)");
        const auto dir = scratch("fail");
        CHECK_THROWS_AS(run_experiment(c, dir), NumericalError);
        CHECK_FALSE(fs::exists(dir));
        for (const auto& e : fs::directory_iterator(dir.parent_path()))
            CHECK(e.path().filename().string().find(".robpen_test_fail.tmp") == std::string::npos);
    }
}
