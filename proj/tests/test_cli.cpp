#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "json.hpp"
#include "kyle/coefficients.hpp"
#include "kyle/errors.hpp"

namespace kyle::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code;
    std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "kyle");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        unsetenv("KYLE_SEED");
        dir_ = fs::temp_directory_path() /
               ("kyle_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
        cfg_ = (dir_ / "base.cfg").string();
        std::ofstream(cfg_) << "# reference set\nsigma = 1\nhorizon = 1\nsigma_xi = 1\nsigma_beta = 0.5\n"
                               "eps = 0.2\ngamma = 0.5\nm_xi = 0\nm_beta = 0\n";
    }
    void TearDown() override {
        unsetenv("KYLE_SEED");
        fs::remove_all(dir_);
    }
    std::string path(const char* name) const { return (dir_ / name).string(); }

    fs::path dir_;
    std::string cfg_;
};

std::vector<std::vector<std::string>> read_csv(const std::string& file) {
    std::ifstream in(file);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

TEST_F(Cli, CalibratePrintsJson) {
    const auto r = run_cli({"calibrate", "--config", cfg_});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["v"].get<double>(), 1.2206302012733835834, 1e-13);
    EXPECT_NEAR(j["lambda"].get<double>(), 0.72435334536634218976, 1e-13);
    EXPECT_EQ(j["m"].get<double>(), 0.0);
    EXPECT_NEAR(j["sigma_e"].get<double>(), 1.0062305898749053641, 1e-15);
    EXPECT_TRUE(j.contains("g_v"));
}

TEST_F(Cli, SetOverridesConfig) {
    const auto r = run_cli({"calibrate", "--config", cfg_, "--set", "gamma=0", "--set", "sigma=2", "--set", "sigma_xi=3"});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["v"].get<double>(), 2.0);
    EXPECT_EQ(j["lambda"].get<double>(), 1.5);
}

TEST_F(Cli, CoeffsCsvRoundTrips) {
    const auto out = path("c.csv");
    const auto r = run_cli({"coeffs", "--config", cfg_, "--grid", "100", "--out", out});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto rows = read_csv(out);
    ASSERT_EQ(rows.size(), 102u);
    EXPECT_EQ(rows[0].front(), "t");
    const auto vp = validate(ModelParams{});
    const Coefficients co(vp, solve_v(vp));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        ASSERT_EQ(rows[i].size(), rows[0].size());
        const double t = std::stod(rows[i][0]);
        const auto s = co.eval(t);
        EXPECT_EQ(std::stod(rows[i][1]), s.p);
        EXPECT_EQ(std::stod(rows[i][2]), s.q);
        EXPECT_EQ(std::stod(rows[i][3]), s.s);
        EXPECT_EQ(std::stod(rows[i][4]), s.k);
        EXPECT_EQ(std::stod(rows[i][8]), s.Sigma.a11);
        EXPECT_EQ(std::stod(rows[i][9]), s.Sigma.a12);
        EXPECT_EQ(std::stod(rows[i][14]), s.int_k2);
    }
    EXPECT_EQ(std::stod(rows.back()[0]), 1.0);
}

TEST_F(Cli, FormatDoubleIsLossless) {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.72435334536634218976}) {
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
}

TEST_F(Cli, SweepGamma) {
    const auto rows = sweep("gamma", {0.5, 0.25, 0.1, 0.01}, ModelParams{});
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].lambda, rows[i - 1].lambda);
    EXPECT_LT(rows.back().lambda, 1.0);  // sigma_xi / (sigma sqrt T)
    const auto r = run_cli({"sweep", "--config", cfg_, "--param", "gamma", "--values", "0.5,0.25,0.1,0.01"});
    ASSERT_EQ(r.code, kOk) << r.err;
    std::istringstream in(r.out);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "value,v,lambda,p_0,mm_profit_target");
    int n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    EXPECT_EQ(n, 4);
}

TEST_F(Cli, SweepEps) {
    const auto rows = sweep("eps", {0.4, 0.2, 0.1, 0.05}, ModelParams{});
    const double xstar = 0.25 + 0.5 * std::sqrt(4.25);  // gamma = 0.5, sigma = sigma_xi = T = 1
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].lambda, rows[i - 1].lambda);
    EXPECT_LT(rows.back().lambda, 1.0 / xstar);
    EXPECT_LT(1.0 / xstar - rows.back().lambda, 1.0 / xstar - rows.front().lambda);
}

TEST_F(Cli, SweepErrors) {
    EXPECT_THROW(sweep("gamma", {}, ModelParams{}), DomainError);
    EXPECT_THROW(sweep("sigma", {0.5}, ModelParams{}), DomainError);
    EXPECT_THROW(sweep("gamma", {0.5, -0.1}, ModelParams{}), DomainError);
    EXPECT_THROW(sweep("gamma", {0.1, 0.5}, ModelParams{}), DomainError);
    EXPECT_EQ(run_cli({"sweep", "--param", "lambda", "--values", "0.5"}).code, kUsage);
    EXPECT_EQ(run_cli({"sweep", "--param", "gamma"}).code, kUsage);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run_cli({}).code, kUsage);
    EXPECT_EQ(run_cli({"frobnicate"}).code, kUsage);
    EXPECT_EQ(run_cli({"calibrate", "--bogus"}).code, kUsage);
    EXPECT_EQ(run_cli({"calibrate", "--config", path("missing.cfg")}).code, kUsage);
    EXPECT_EQ(run_cli({"calibrate", "--set", "lambda=1"}).code, kUsage);
    EXPECT_EQ(run_cli({"calibrate", "--set", "gamma"}).code, kUsage);
    EXPECT_EQ(run_cli({"calibrate", "--set", "sigma=0"}).code, kUsage);
    const auto r = run_cli({"calibrate", "--set", "sigma=-1"});
    EXPECT_NE(r.err.find("sigma"), std::string::npos);
    std::ofstream(path("bad.cfg")) << "sigma = 1\nnot a setting\n";
    EXPECT_EQ(run_cli({"calibrate", "--config", path("bad.cfg")}).code, kUsage);
}

TEST_F(Cli, HelpExitsZero) {
    const auto r = run_cli({"--help"});
    EXPECT_EQ(r.code, kOk);
    EXPECT_NE(r.out.find("calibrate"), std::string::npos);
}

TEST_F(Cli, SimulateSummaryAndTrace) {
    const auto trace = path("paths.csv");
    const auto r = run_cli({"simulate", "--config", cfg_, "--paths", "64", "--steps", "50", "--refine", "3",
                            "--paths-out", trace, "--trace-path", "2"});
    ASSERT_EQ(r.code, kOk) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["n_paths"].get<int>(), 64);
    EXPECT_TRUE(j["terminal"].contains("price"));
    EXPECT_TRUE(j["identity_gaps"].contains("median_abs_terminal_price"));
    const auto rows = read_csv(trace);
    ASSERT_EQ(rows.size(), 1u + 54u);
    const std::vector<std::string> header{"t", "chi", "zq", "mu_p1", "mu_p2", "x_star", "y", "price", "a1", "a2",
                                          "rn_weight"};
    EXPECT_EQ(rows[0], header);
    EXPECT_EQ(std::stod(rows[1][0]), 0.0);
    EXPECT_EQ(std::stod(rows[1][10]), 1.0);
}

TEST_F(Cli, SeedPrecedence) {
    const std::vector<std::string> base{"simulate", "--config", cfg_, "--paths", "16", "--steps", "20", "--refine", "0"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return run_cli(a);
    };
    const auto s5 = with({"--seed", "5"});
    const auto s6 = with({"--seed", "6"});
    ASSERT_EQ(s5.code, kOk);
    EXPECT_NE(s5.out, s6.out);
    setenv("KYLE_SEED", "5", 1);
    EXPECT_EQ(with({}).out, s5.out);
    EXPECT_EQ(with({"--seed", "6"}).out, s6.out);   // flag beats env
    EXPECT_EQ(with({"--set", "seed=6"}).out, s6.out);  // --set beats env
    setenv("KYLE_SEED", "five", 1);
    EXPECT_EQ(with({}).code, kUsage);
}

TEST_F(Cli, ValidateWritesReport) {
    const auto out = path("r.json");
    const auto r = run_cli({"validate", "--config", cfg_, "--paths", "100000", "--steps", "100", "--refine", "4",
                            "--no-timing", "--out", out});
    std::ifstream in(out);
    const auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["runtime_seconds"].get<double>(), 0.0);
    bool all_good = true;
    for (const auto& c : j["checks"]) all_good = all_good && (c["passed"].get<bool>() != c["control"].get<bool>());
    EXPECT_EQ(r.code, all_good ? kOk : kCheckFailure);
    EXPECT_NE(r.err.find("mm_profit.mean_vs_exact_closed_form"), std::string::npos);
}

}  // namespace
}  // namespace kyle::cli
