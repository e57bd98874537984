// End-to-end tests of the installed command-line tool.  The binary under
// test is located through the AQO_CLI_PATH environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "support/schema_check.hpp"

using nlohmann::json;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    REQUIRE(static_cast<bool>(out));
}

std::string temp_path(const std::string& suffix) {
    static int counter = 0;
    return "/tmp/aqo_cli_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++) + suffix;
}

CliResult run_cli(const std::string& args) {
    const char* cli = std::getenv("AQO_CLI_PATH");
    REQUIRE_MESSAGE(cli != nullptr, "AQO_CLI_PATH must point at the binary");
    const std::string out = temp_path(".out");
    const std::string err = temp_path(".err");
    const std::string cmd = std::string("'") + cli + "' " + args + " > " + out +
                            " 2> " + err + " < /dev/null";
    const int rc = std::system(cmd.c_str());
    CliResult r;
    r.code = (rc != -1 && WIFEXITED(rc)) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    std::remove(out.c_str());
    std::remove(err.c_str());
    return r;
}

}  // namespace

TEST_CASE("version and help") {
    const CliResult v = run_cli("--version");
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
    CHECK(run_cli("--help").code == 0);
    CHECK(run_cli("crossover --help").code == 0);
}

TEST_CASE("spectrum: schema-valid JSON on stdout, timing on stderr") {
    const CliResult r = run_cli("spectrum");
    REQUIRE(r.code == 0);
    CHECK(r.err.find("finished in") != std::string::npos);

    const json bundle = json::parse(r.out);
    const auto errors = schema_check::validate(
        schema_check::load_schema("spectrum"), bundle);
    for (const auto& e : errors) MESSAGE(e);
    CHECK(errors.empty());

    // Default instance: one decay eigenvalue at -2 lambda^2 = -0.02.
    bool found = false;
    for (const auto& b : bundle["outputs"]["blocks"])
        if (std::abs(b["eigenvalue"]["re"].get<double>() + 0.02) < 1e-12 &&
            std::abs(b["eigenvalue"]["im"].get<double>()) < 1e-12)
            found = true;
    CHECK(found);
}

TEST_CASE("spectrum of the closed system has the +-i omega pair") {
    const CliResult r = run_cli("spectrum --lambda 0");
    REQUIRE(r.code == 0);
    const json bundle = json::parse(r.out);
    int oscillators = 0;
    for (const auto& b : bundle["outputs"]["blocks"])
        if (std::abs(std::abs(b["eigenvalue"]["im"].get<double>()) - 1.0) < 1e-10)
            ++oscillators;
    CHECK(oscillators == 2);
}

TEST_CASE("crossover: CSV row shapes") {
    const CliResult single = run_cli("crossover --format csv --grid 201");
    REQUIRE(single.code == 0);
    CHECK(single.out.rfind("T,T2c,T3c,T4c,window_flag\n", 0) == 0);
    CHECK(std::count(single.out.begin(), single.out.end(), '\n') == 2);
    CHECK(single.out.find("\n11,") != std::string::npos);

    const CliResult grid =
        run_cli("crossover --format csv --grid 201 --T-grid 5:50:3:log");
    REQUIRE(grid.code == 0);
    CHECK(std::count(grid.out.begin(), grid.out.end(), '\n') == 4);
}

TEST_CASE("csv format is rejected for non-grid commands") {
    const CliResult r = run_cli("evolve --format csv");
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find("csv") != std::string::npos);
}

TEST_CASE("config file, flag overrides, and --dump-config") {
    const std::string cfg = temp_path(".cfg");
    write_file(cfg, "# comment\nlambda=0.2\nT=7\n");

    const CliResult dumped = run_cli("spectrum --config " + cfg + " --dump-config");
    REQUIRE(dumped.code == 0);
    CHECK(dumped.out.find("lambda=0.2\n") != std::string::npos);
    CHECK(dumped.out.find("T=7\n") != std::string::npos);

    // Flags are applied after the file.
    const CliResult overridden =
        run_cli("spectrum --config " + cfg + " --T 9 --dump-config");
    REQUIRE(overridden.code == 0);
    CHECK(overridden.out.find("T=9\n") != std::string::npos);
    CHECK(overridden.out.find("lambda=0.2\n") != std::string::npos);

    // The canonical form round-trips through --config byte for byte.
    const std::string canon = temp_path(".cfg");
    write_file(canon, dumped.out);
    const CliResult again = run_cli("spectrum --config " + canon + " --dump-config");
    CHECK(again.out == dumped.out);

    std::remove(cfg.c_str());
    std::remove(canon.c_str());
}

TEST_CASE("bad configuration inputs exit 2 without output") {
    const std::string cfg = temp_path(".cfg");
    write_file(cfg, "this is not a key-value line\n");
    const CliResult bad = run_cli("spectrum --config " + cfg);
    CHECK(bad.code == 2);
    CHECK(bad.out.empty());
    std::remove(cfg.c_str());

    CHECK(run_cli("spectrum --config /nonexistent/path.cfg").code == 2);
    CHECK(run_cli("spectrum --n-qubits 9").code == 2);
    CHECK(run_cli("optimal --target 0.5").code == 2);
    CHECK(run_cli("spectrum --no-such-flag 1").code == 2);
    CHECK(run_cli("bogus-command").code == 2);
    CHECK(run_cli("").code == 2);
}

TEST_CASE("structural analysis failures exit 4") {
    const CliResult r = run_cli("crossover --lambda 1 --grid 51");
    CHECK(r.code == 4);
    CHECK(r.out.empty());
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("--out writes exactly the stdout bytes") {
    const std::string args = "crossover --format csv --grid 201";
    const CliResult direct = run_cli(args);
    REQUIRE(direct.code == 0);

    const std::string path = temp_path(".csv");
    const CliResult filed = run_cli(args + " --out " + path);
    REQUIRE(filed.code == 0);
    CHECK(filed.out.empty());
    CHECK(slurp(path) == direct.out);
    std::remove(path.c_str());

    // JSON output is deterministic across runs.
    const CliResult j1 = run_cli("crossover --grid 201");
    const CliResult j2 = run_cli("crossover --grid 201");
    CHECK(j1.out == j2.out);
}

TEST_CASE("sweep CSV carries the lambda column") {
    const CliResult r = run_cli(
        "sweep --lambda 0.1,0.3 --T-grid 11:11:1 --grid 201 --format csv");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("lambda,T,T2c,T3c,T4c,window_flag\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
    CHECK(r.out.find("\n0.1,11,") != std::string::npos);
    CHECK(r.out.find("\n0.3,11,") != std::string::npos);
}
