#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const char* kCounterexample = "n=2 m=1\ndx1 = -x1*(1 - sin(x2))\ndx2 = -x2 + u1\n";
const char* kIssSpec = R"j({"form": "ISS", "slots": {"gamma": "r",
  "beta": {"form": "composed", "first": "r", "second": "r"}}})j";
const char* kIissSpec = R"j({"form": "IISS", "slots": {"alpha": "r", "sigma": "r",
  "beta": {"form": "composed", "first": "r", "second": "r"}}})j";

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / ("iiss_cli_" + std::to_string(::getpid()) + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    static std::string read(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run(const std::string& args) const {
        const std::string cmd = std::string(IISS_CLI_PATH) + " " + args + " > " + path("stdout.txt") + " 2> " +
                                path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string stderr_text() const { return read(path("stderr.txt")); }

    fs::path dir_;
};

double last_first_column_value(const std::string& csv, std::size_t column) {
    std::istringstream in(csv);
    std::string line;
    std::string last;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#') {
            last = line;
        }
    }
    std::istringstream row(last);
    std::string cell;
    for (std::size_t i = 0; i <= column; ++i) {
        std::getline(row, cell, ',');
    }
    return std::stod(cell);
}

}  // namespace

TEST_F(Cli, SimulateLinear) {
    const auto sys = write("lin.sys", "n=1 m=0\ndx1 = -x1\n");
    ASSERT_EQ(run("simulate --system " + sys + " --xi 1 --horizon 1 --out " + path("out")), 0) << stderr_text();
    const auto csv = read(path("out/trajectory.csv"));
    EXPECT_NE(csv.find("# seed 0"), std::string::npos);
    EXPECT_NEAR(last_first_column_value(csv, 1), std::exp(-1.0), 1e-6);
    EXPECT_TRUE(fs::exists(path("out/status.json")));
}

TEST_F(Cli, SimulateEscape) {
    const auto sys = write("sq.sys", "n=1 m=0\ndx1 = x1^2\n");
    ASSERT_EQ(run("simulate --system " + sys + " --xi 1 --horizon 2 --out " + path("out")), 2) << stderr_text();
    const auto status = read(path("out/status.json"));
    EXPECT_NE(status.find("escape_time"), std::string::npos);
}

TEST_F(Cli, SimulateMalformed) {
    const auto sys = write("bad.sys", "n=1 m=0\ndx1 = -x1 * * 2\n");
    EXPECT_EQ(run("simulate --system " + sys + " --xi 1 --out " + path("out")), 1);
    EXPECT_NE(stderr_text().find("2:"), std::string::npos) << stderr_text();
    EXPECT_FALSE(fs::exists(path("out")));
}

TEST_F(Cli, CheckEquilibriumWitnessViolates) {
    const auto sys = write("ce.sys", kCounterexample);
    const auto spec = write("iss.json", kIssSpec);
    const auto input = write("u.txt", "0 1.5707963267948966\n");
    EXPECT_EQ(run("check --system " + sys + " --spec " + spec + " --input " + input +
                  " --xi pi/2+1,pi/2 --horizon 30 --out " + path("out")),
              3)
        << stderr_text();
    EXPECT_NE(read(path("out/report.json")).find("\"verdict\": \"violated\""), std::string::npos);
    EXPECT_TRUE(fs::exists(path("out/witness.json")));
}

TEST_F(Cli, CheckLinearHolds) {
    const auto sys = write("lin.sys", "n=1 m=1\ndx1 = -x1 + u1\n");
    const auto spec = write("iiss.json", kIissSpec);
    EXPECT_EQ(run("check --system " + sys + " --spec " + spec + " --xi 1 --out " + path("out")), 0)
        << stderr_text();
    EXPECT_FALSE(fs::exists(path("out/witness.json")));
}

TEST_F(Cli, CheckMissingSlot) {
    const auto sys = write("lin.sys", "n=1 m=1\ndx1 = -x1 + u1\n");
    const auto spec = write("bad.json", R"j({"form": "ISS", "slots": {"gamma": "r"}})j");
    EXPECT_EQ(run("check --system " + sys + " --spec " + spec + " --xi 1 --out " + path("out")), 1);
    EXPECT_NE(stderr_text().find("beta"), std::string::npos) << stderr_text();
}

TEST_F(Cli, FalsifyWitnessReplays) {
    const auto sys = write("ce.sys", kCounterexample);
    const auto spec = write("iss.json", kIssSpec);
    const std::string common = "falsify --system " + sys + " --spec " + spec +
                               " --state-radius 3.5707963267948966 --input-radius 1.5707963267948966"
                               " --horizon 20 --budget 2000 --seed 5";
    ASSERT_EQ(run(common + " --out " + path("a")), 3) << stderr_text();
    ASSERT_EQ(run(common + " --jobs 4 --out " + path("b")), 3) << stderr_text();
    EXPECT_EQ(read(path("a/report.json")), read(path("b/report.json")));
    EXPECT_EQ(read(path("a/witness.json")), read(path("b/witness.json")));
    EXPECT_EQ(run("check --system " + sys + " --spec " + spec + " --witness " + path("a/witness.json") +
                  " --out " + path("replay")),
              3)
        << stderr_text();
}

TEST_F(Cli, FalsifyLinearHolds) {
    const auto sys = write("lin.sys", "n=1 m=1\ndx1 = -x1 + u1\n");
    const auto spec = write("iiss.json", kIissSpec);
    EXPECT_EQ(run("falsify --system " + sys + " --spec " + spec + " --budget 100 --out " + path("out")), 0)
        << stderr_text();
    EXPECT_NE(read(path("out/report.json")).find("holds-on-samples"), std::string::npos);
}

TEST_F(Cli, OutputReplacesExistingDirectory) {
    const auto sys = write("lin.sys", "n=1 m=0\ndx1 = -x1\n");
    fs::create_directories(path("out"));
    write("out/stale.txt", "old");
    ASSERT_EQ(run("simulate --system " + sys + " --xi 1 --out " + path("out")), 0);
    EXPECT_FALSE(fs::exists(path("out/stale.txt")));
    EXPECT_TRUE(fs::exists(path("out/trajectory.csv")));
    for (const auto& e : fs::directory_iterator(dir_)) {
        EXPECT_EQ(e.path().filename().string().find(".out."), std::string::npos) << e.path();
    }
}

TEST_F(Cli, FunctionsBoundFamily) {
    const auto in = write("bf.json", R"j({"family": {"template": "M*r", "size": 4}, "grid": {"linear": [0, 3, 64]}})j");
    EXPECT_EQ(run("functions bound-family --input " + in + " --out " + path("out")), 0) << stderr_text();
    const auto result = read(path("out/result.json"));
    EXPECT_NE(result.find("\"sigma\""), std::string::npos);
    EXPECT_EQ(result.find("\"pass\": false"), std::string::npos);
}

TEST_F(Cli, FunctionsFactorPosdef) {
    const auto in = write("pd.json", R"j({"rho": "r/(1+r^2)", "grid": {"log": [1e-3, 100, 64], "with_zero": true}})j");
    EXPECT_EQ(run("functions factor-posdef --input " + in + " --out " + path("out")), 0) << stderr_text();
    const auto result = nlohmann::json::parse(read(path("out/result.json")));
    const auto& cert = result.at("result").at("certificate");
    EXPECT_TRUE(cert.at("pass").get<bool>());
    EXPECT_NEAR(cert.at("worst_slack").get<double>(), 0.0, 1e-12);
}

TEST_F(Cli, FunctionsUniformize) {
    const auto in = write("uf.json", R"j({
      "decay": {"template": {"form": "composed", "first": "r", "second": "M*r"}, "size": 8},
      "integrand": {"template": "r", "size": 8},
      "gain": {"template": "r", "size": 8},
      "R_max": 3, "S_max": 3, "samples": 200})j");
    EXPECT_EQ(run("functions uniformize --input " + in + " --out " + path("out")), 0) << stderr_text();
}

TEST_F(Cli, FunctionsUnknownConstruction) {
    const auto in = write("x.json", "{}");
    EXPECT_EQ(run("functions cube --input " + in + " --out " + path("out")), 1);
}

TEST_F(Cli, Counterexample) {
    ASSERT_EQ(run("counterexample --out " + path("out")), 0) << stderr_text();
    EXPECT_TRUE(fs::exists(path("out/witness.json")));
    const auto bounds = read(path("out/bounds.csv"));
    EXPECT_NE(bounds.find("case,xi1,xi2,input_sup,regime,x1_margin,x2_margin"), std::string::npos);
    EXPECT_LE(std::abs(last_first_column_value(read(path("out/trajectory.csv")), 4)), 1e-6);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("simulate"), 1);
    EXPECT_EQ(run("--help"), 0);
}
