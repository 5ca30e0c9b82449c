#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "compbound/cli.hpp"

using namespace compbound;
namespace cli = compbound::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "compbound");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "compbound_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find("\r\n")); }

}  // namespace

TEST(CliParse, Examples) {
    auto cfg = cli::parse_args({"bound", "--f", "exp:lambda=0.5"});
    EXPECT_EQ(cfg.command, "bound");
    EXPECT_EQ(*cfg.function, FunctionSpec::exponential(0.5));

    cfg = cli::parse_args({"--seed", "9", "compare", "--f", "pow:m=2", "--horizon", "12", "--step", "1/256"});
    EXPECT_EQ(cfg.command, "compare");
    EXPECT_EQ(cfg.seed, 9u);
    EXPECT_EQ(*cfg.horizon, 12u);
    EXPECT_DOUBLE_EQ(cfg.step, 1.0 / 256.0);

    cfg = cli::parse_args({"test-shift", "--f", "remark2", "--trials", "50", "--seed", "3"});
    EXPECT_EQ(cfg.trials, 50u);
    EXPECT_EQ(cfg.seed, 3u);

    cfg = cli::parse_args({"solve-recursion", "--f", "quad", "--tol", "1e-6", "--max-iter", "40"});
    EXPECT_EQ(cfg.solver().b_tolerance, 1e-6);
    EXPECT_EQ(cfg.solver().max_iterations, 40u);
}

TEST(CliParse, UsageErrors) {
    auto usage = [](std::vector<std::string> args) {
        try {
            cli::parse_args(args);
        } catch (const cli::UsageError& e) {
            return std::string(e.what());
        }
        return std::string("accepted");
    };
    EXPECT_EQ(usage({"bound", "--f", "exp:lambda=-1"}), "lambda must be > 0");
    EXPECT_NE(usage({"bound"}), "accepted");
    EXPECT_NE(usage({"frobnicate", "--f", "quad"}), "accepted");
    EXPECT_NE(usage({"solve-bellman", "--f", "quad"}), "accepted");  // --horizon is required
    EXPECT_NE(usage({"compare", "--f", "quad", "--step", "0"}), "accepted");
    EXPECT_NE(usage({"compare", "--f", "quad", "--step", "1/x"}), "accepted");
    EXPECT_NE(usage({"simulate", "--f", "quad", "--chain", "other"}), "accepted");
    EXPECT_NE(usage({"test-shift", "--f", "quad", "--trials", "0"}), "accepted");

    const auto r = run({"bound", "--f", "exp:lambda=-1"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("lambda must be > 0"), std::string::npos);
}

TEST(CliRun, BoundOutputs) {
    auto r = run({"bound", "--f", "exp:lambda=0.5"});
    ASSERT_EQ(r.code, cli::kExitOk);
    auto doc = compbound::json::parse(r.out);
    EXPECT_NEAR(doc.at("B").get<double>(), 2.0, 1e-8);
    EXPECT_TRUE(doc.at("cross_check_ok").get<bool>());

    r = run({"bound", "--f", "exp:lambda=1"});
    ASSERT_EQ(r.code, cli::kExitOk);
    EXPECT_EQ(compbound::json::parse(r.out).at("B"), "unbounded");
}

TEST(CliRun, ReportExponentialHalf) {
    ScanConfig scan;
    scan.trials = 500;
    const auto doc = cli::run_report(FunctionSpec::exponential(0.5), 10, 1.0 / 128.0, scan);
    EXPECT_TRUE(doc.at("class_s").get<bool>());
    EXPECT_NEAR(doc.at("B").get<double>(), 2.0, 1e-8);
    EXPECT_TRUE(doc.at("all_pass").get<bool>());
    EXPECT_TRUE(doc.at("findings").empty());
}

TEST(CliRun, ReportExponentialOneAndAHalf) {
    ScanConfig scan;
    scan.trials = 500;
    const auto doc = cli::run_report(FunctionSpec::exponential(1.5), 6, 1.0 / 64.0, scan);
    EXPECT_EQ(doc.at("B"), "unbounded");
    EXPECT_EQ(doc.at("recursion").at("status"), "diverged");
    const auto& findings = doc.at("findings");
    EXPECT_NE(std::find(findings.begin(), findings.end(), "B unbounded"), findings.end());
}

TEST(CliRun, ReportPiecewiseExampleIsAFindingNotAFailure) {
    const auto r = run({"report", "--f", "remark2", "--horizon", "6", "--step", "1/64", "--trials", "300", "--seed", "7"});
    EXPECT_EQ(r.code, cli::kExitOk) << r.err;
    const auto doc = compbound::json::parse(r.out);
    EXPECT_FALSE(doc.at("class_s").get<bool>());
    const auto& findings = doc.at("findings");
    EXPECT_NE(std::find(findings.begin(), findings.end(), "not in class S"), findings.end());
    EXPECT_NE(std::find(findings.begin(), findings.end(), "shift inequality violated"), findings.end());
}

TEST(CliRun, OutputsAreByteIdenticalForIdenticalArguments) {
    const std::vector<std::vector<std::string>> cases{
        {"test-shift", "--f", "remark2", "--trials", "2000", "--seed", "7"},
        {"--threads", "3", "simulate", "--f", "exp:lambda=1", "--n", "10", "--paths", "20000", "--seed", "5"},
        {"compare", "--f", "pow:m=2", "--horizon", "5", "--step", "1/64"},
    };
    for (const auto& args : cases) {
        const auto a = run(args);
        const auto b = run(args);
        ASSERT_EQ(a.code, cli::kExitOk) << a.err;
        EXPECT_EQ(a.out, b.out);
    }
    // Thread count must not leak into results.
    const auto one = run({"--threads", "1", "test-shift", "--f", "quad", "--trials", "1500", "--seed", "2"});
    const auto four = run({"--threads", "4", "test-shift", "--f", "quad", "--trials", "1500", "--seed", "2"});
    EXPECT_EQ(one.out, four.out);
}

TEST(CliRun, FunctionSpecRoundTripsThroughOutput) {
    for (const std::string text : {"exp:lambda=0.25", "pow:m=3", "quad", "remark2"}) {
        const auto r = run({"bound", "--f", text});
        ASSERT_EQ(r.code, cli::kExitOk);
        const auto printed = compbound::json::parse(r.out).at("function").get<std::string>();
        EXPECT_EQ(printed, text);
        EXPECT_EQ(parse_function_spec(printed), parse_function_spec(text));
    }
}

TEST(CliRun, CsvHeaders) {
    const auto rec = scratch("rec.csv");
    ASSERT_EQ(run({"--csv", rec.string(), "solve-recursion", "--f", "exp:lambda=0.5"}).code, cli::kExitOk);
    EXPECT_EQ(first_line(slurp(rec)), "n,b_n,a_star");

    const auto bell = scratch("bell.csv");
    ASSERT_EQ(run({"--csv", bell.string(), "solve-bellman", "--f", "quad", "--horizon", "3", "--step", "1/32"}).code,
              cli::kExitOk);
    const auto text = slurp(bell);
    EXPECT_EQ(first_line(text), "n,y,V,a_star");
    EXPECT_NE(text.find("\r\n"), std::string::npos);

    const auto cmp = scratch("cmp.csv");
    ASSERT_EQ(run({"--csv", cmp.string(), "compare", "--f", "pow:m=2", "--horizon", "4", "--step", "1/32"}).code,
              cli::kExitOk);
    EXPECT_EQ(first_line(slurp(cmp)), "n,c_n,b_n,gap");

    const auto sim = scratch("sim.csv");
    ASSERT_EQ(run({"--csv", sim.string(), "simulate", "--f", "exp:lambda=1", "--n", "4", "--paths", "10"}).code,
              cli::kExitOk);
    EXPECT_EQ(first_line(slurp(sim)), "path_id,k,X,Y,M");
}

TEST(CliRun, PolicyArtifactFeedsTheExtremalSimulation) {
    const auto artifact = scratch("policy.json");
    ASSERT_EQ(run({"--json", artifact.string(), "solve-bellman", "--f", "exp:lambda=0.5", "--horizon", "8", "--step",
                   "1/128"})
                  .code,
              cli::kExitOk);
    const auto r = run({"simulate", "--chain", "extremal", "--f", "exp:lambda=0.5", "--policy", artifact.string()});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const auto doc = compbound::json::parse(r.out);
    EXPECT_EQ(doc.at("chain"), "extremal");

    const auto wrong = run({"simulate", "--chain", "extremal", "--f", "pow:m=2", "--policy", artifact.string()});
    EXPECT_EQ(wrong.code, cli::kExitFailure);
}

TEST(CliRun, HelpExitsCleanly) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("solve-bellman"), std::string::npos);
}
