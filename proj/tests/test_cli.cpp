#include "mcdcert/cli.hpp"
#include "mcdcert/report.hpp"

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mcdcert;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mcdcert_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string write(const std::string& name, const std::string& text) const {
        const fs::path p = path / name;
        std::ofstream(p) << text;
        return p.string();
    }
};

const TempDir& tmp() {
    static const TempDir dir;
    return dir;
}

std::string box(int n, const char* extra = "") {
    std::string s = "[";
    for (int i = 1; i <= n; ++i) {
        if (i > 1) s += ", ";
        s += R"({"name": "x)" + std::to_string(i) + R"(", "min": 0, "max": 1)" + extra + "}";
    }
    return s + "]";
}

std::string config(const std::string& name, const std::string& inputs, const std::string& function) {
    return tmp().write(name + ".json",
                       R"({"name": ")" + name + R"(", "inputs": )" + inputs + R"(, "function": )" + function + "}");
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "mcdcert");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

Json structured(std::vector<std::string> args) {
    args.push_back("--format");
    args.push_back("structured");
    const auto r = run(args);
    REQUIRE(r.code <= 1);
    return Json::parse(r.out);
}

const char* kProduct = R"({"type": "builtin", "name": "product"})";

}  // namespace

TEST_CASE("diameters command") {
    const auto product = config("product3", box(3), kProduct);
    const Json rep = structured({"diameters", "--config", product});
    CHECK(rep["command"] == "diameters");
    for (const auto& d : rep["estimate"]["diameters"]) CHECK(d["D"].get<double>() == 1.0);
    CHECK(rep["estimate"]["delta_F"].get<double>() == 1.0);
    CHECK(rep["bounds"]["n_eff"].get<double>() == 3.0);
    CHECK_NOTHROW(revalidate_report(rep));

    const auto table = run({"diameters", "--config", product});
    CHECK(table.code == 0);
    CHECK(table.out.find("n_eff = 3") != std::string::npos);

    const auto linear = config("linear23", box(2), R"({"type": "builtin", "name": "linear", "weights": [2, 3]})");
    const Json lr = structured({"diameters", "--config", linear});
    CHECK(lr["estimate"]["diameters"][0]["D"].get<double>() == 2.0);
    CHECK(lr["estimate"]["diameters"][1]["D"].get<double>() == 3.0);
    CHECK(lr["bounds"]["n_eff"].get<double>() == doctest::Approx(25.0 / 13.0));
}

TEST_CASE("usage errors") {
    CHECK(run({"diameters", "--config", (tmp().path / "missing.json").string()}).code == kExitUsage);
    const auto product = config("product3", box(3), kProduct);
    CHECK(run({"certify", "--config", product, "--margin", "0.6", "--epsilon", "1.5"}).code == kExitUsage);
    CHECK(run({"certify", "--config", product}).code == kExitUsage);
    CHECK(run({"certify", "--config", product, "--margin", "-1"}).code == kExitUsage);
    CHECK(run({"validate", "--config", product, "--bound-source", "absolute", "--samples", "10"}).code ==
          kExitUsage);
    CHECK(run({"validate", "--config", product, "--bound-source", "other"}).code == kExitUsage);
    CHECK(run({"diameters", "--config", product, "--method", "grid:1"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
    const auto broken = config("broken", box(1), R"({"type": "expression", "text": "x1 + y"})");
    CHECK(run({"diameters", "--config", broken}).code == kExitUsage);
}

TEST_CASE("certify command") {
    const auto product = config("product3", box(3), kProduct);
    CHECK(run({"certify", "--config", product, "--margin", "0.6"}).code == kExitOk);
    CHECK(run({"certify", "--config", product, "--margin", "0.6", "--mean", "0.125", "--direction", "minus"}).code ==
          kExitOk);
    CHECK(run({"certify", "--config", product, "--margin", "0.6", "--mean", "0.125", "--direction", "plus"}).code ==
          kExitNegative);
    CHECK(run({"certify", "--config", product, "--margin", "0.6", "--mean", "2"}).code == kExitUsage);

    // Declared distributions switch the mean to a Monte Carlo estimate near 1/8.
    const auto uniform = config("product3u", box(3, R"(, "dist": "uniform")"), kProduct);
    const Json rep = structured({"certify", "--config", uniform, "--margin", "0.6", "--samples", "20000",
                                 "--direction", "minus"});
    CHECK(rep["mean_estimate"]["mean"].get<double>() == doctest::Approx(0.125).epsilon(0.05));
    CHECK(rep["certification"]["recommendation"] == "ABSOLUTE");
    CHECK(run({"certify", "--config", uniform, "--margin", "0.6", "--samples", "20000"}).code == kExitNegative);

    const auto four = config("linear4", box(4), R"({"type": "builtin", "name": "linear"})");
    CHECK(run({"certify", "--config", four, "--margin", "1.8"}).code == kExitNegative);

    const auto constant = config("constant", box(2), R"({"type": "expression", "text": "3 + 0*x1 + 0*x2"})");
    const Json cr = structured({"certify", "--config", constant, "--margin", "0"});
    CHECK(cr["certification"]["summary"]["mcdiarmid_bound"].get<double>() == 0.0);
    CHECK(run({"certify", "--config", constant, "--margin", "0"}).code == kExitOk);
}

TEST_CASE("validate command") {
    const auto product = config("product3", box(3), kProduct);
    const Json rep = structured({"validate", "--config", product, "--bound-source", "absolute", "--samples", "5000"});
    CHECK(rep["validation"]["exceed_count"].get<int>() == 0);
    CHECK_NOTHROW(revalidate_report(rep));

    const auto linear = config("linear20", box(20), R"({"type": "builtin", "name": "linear"})");
    const auto r = run({"validate", "--config", linear, "--bound-source", "mcdiarmid", "--epsilon", "0.01",
                        "--samples", "100000", "--mean", "10"});
    CHECK(r.code == kExitOk);
}

TEST_CASE("analyze command") {
    const auto ten = config("linear10", box(10), R"({"type": "builtin", "name": "linear"})");
    const auto r = run({"analyze", "--config", ten});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("10.5966") != std::string::npos);

    const auto constant = config("constant", box(2), R"({"type": "expression", "text": "3 + 0*x1 + 0*x2"})");
    const Json rep = structured({"analyze", "--config", constant, "--margin", "0"});
    CHECK(rep["certification"]["recommendation"] == "ABSOLUTE");
    CHECK(rep["usefulness"].is_null());
}

TEST_CASE("command backend") {
    const auto echo =
        config("echo", R"([{"name": "x1", "min": -2, "max": 5}, {"name": "x2", "min": 0, "max": 1}])",
               R"({"type": "command", "argv": ["sh", "-c", "read a b; echo $a"]})");
    const Json rep = structured({"diameters", "--config", echo, "--method", "grid:3", "--workers", "2"});
    CHECK(rep["estimate"]["diameters"][0]["D"].get<double>() == 7.0);
    CHECK(rep["estimate"]["diameters"][1]["D"].get<double>() == 0.0);

    const auto failing = config("failing", box(1), R"({"type": "command", "argv": ["sh", "-c", "exit 4"]})");
    CHECK(run({"diameters", "--config", failing}).code == kExitEvaluation);
}

TEST_CASE("evaluation failure exit code") {
    const auto bad = config("logfail", box(2), R"({"type": "expression", "text": "log(x1 - 0.5) + x2"})");
    CHECK(run({"diameters", "--config", bad}).code == kExitEvaluation);
}

TEST_CASE("structured output is reproducible") {
    const auto f = config("mixed", box(3, R"(, "dist": "uniform")"),
                          R"({"type": "expression", "text": "sin(3*x1) * x2 + x3^2"})");
    const std::vector<std::string> base{"analyze", "--config", f, "--method", "multistart:4,10", "--margin", "0.5",
                                        "--samples", "3000", "--seed", "11", "--bound-source", "mcdiarmid",
                                        "--format", "structured"};
    auto with_workers = [&](const char* w) {
        auto a = base;
        a.push_back("--workers");
        a.push_back(w);
        return run(a);
    };
    const auto a = with_workers("1");
    const auto b = with_workers("3");
    const auto c = with_workers("1");
    REQUIRE(a.code <= 1);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    CHECK_NOTHROW(revalidate_report(Json::parse(a.out)));

    const std::string out_path = (tmp().path / "report.json").string();
    auto d = base;
    d.push_back("--out");
    d.push_back(out_path);
    run(d);
    std::ifstream in(out_path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == a.out);
}

TEST_CASE("installed binary") {
    const auto product = config("product3", box(3), kProduct);
    const std::string out = (tmp().path / "bin_out.txt").string();
    const std::string cmd = std::string("\"") + MCDCERT_CLI_PATH + "\" certify --config \"" + product +
                            "\" --margin 0.6 --mean 0.125 --direction plus > \"" + out + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == kExitNegative);
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("recommendation: NEITHER") != std::string::npos);

    const std::string ok = std::string("\"") + MCDCERT_CLI_PATH + "\" diameters --config \"" + product + "\" > /dev/null";
    CHECK(WEXITSTATUS(std::system(ok.c_str())) == kExitOk);
}
