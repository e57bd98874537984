#include <doctest.h>

#include <json.hpp>
#include <string>

#include "aqo.h"
#include "support/schema_check.hpp"

using nlohmann::json;

namespace {

struct Config {
    aqo_config* p = aqo_config_create();
    ~Config() { aqo_config_destroy(p); }
    aqo_status set(const char* k, const char* v) { return aqo_config_set(p, k, v); }
};

struct Result {
    aqo_result* p = nullptr;
    ~Result() { aqo_result_destroy(p); }
};

std::string canonical_of(const Config& cfg) {
    char* text = nullptr;
    REQUIRE(aqo_config_canonical(cfg.p, &text) == AQO_OK);
    REQUIRE(text != nullptr);
    std::string s(text);
    aqo_string_free(text);
    return s;
}

json run_checked(const Config& cfg, const char* command) {
    Result res;
    REQUIRE_MESSAGE(aqo_run(cfg.p, command, &res.p) == AQO_OK, aqo_last_error());
    REQUIRE(res.p != nullptr);
    const json bundle = json::parse(aqo_result_json(res.p));
    const json schema = schema_check::load_schema(command);
    const auto errors = schema_check::validate(schema, bundle);
    for (const auto& e : errors) MESSAGE(e);
    CHECK(errors.empty());
    return bundle;
}

}  // namespace

TEST_CASE("version string") {
    CHECK(std::string(aqo_version()) == "0.1.0");
}

TEST_CASE("canonical configuration round-trips byte for byte") {
    Config a;
    CHECK(a.set("lambda", "0.1 0.25") == AQO_OK);
    CHECK(a.set("T-grid", "5:50:7:log") == AQO_OK);
    CHECK(a.set("omega", "1.5") == AQO_OK);
    const std::string text = canonical_of(a);
    CHECK(text.find("lambda=0.1 0.25\n") != std::string::npos);
    CHECK(text.find("model=dj\n") != std::string::npos);

    Config b;
    CHECK(aqo_config_parse(b.p, text.c_str()) == AQO_OK);
    CHECK(canonical_of(b) == text);
}

TEST_CASE("configuration errors map to AQO_ERR_CONFIG with messages") {
    Config cfg;
    CHECK(cfg.set("no-such-key", "1") == AQO_ERR_CONFIG);
    CHECK(std::string(aqo_last_error()).find("no-such-key") != std::string::npos);
    CHECK(cfg.set("n-qubits", "0") == AQO_ERR_CONFIG);
    CHECK(cfg.set("omega", "-1") == AQO_ERR_CONFIG);
    CHECK(cfg.set("T-grid", "5:1:0") == AQO_ERR_CONFIG);
    CHECK(cfg.set("format", "xml") == AQO_ERR_CONFIG);

    CHECK(aqo_config_parse(cfg.p, "omega=2\nbogus line\n") == AQO_ERR_CONFIG);
    CHECK(std::string(aqo_last_error()).find("line 2") != std::string::npos);

    // A successful call clears the thread-local message.
    CHECK(cfg.set("omega", "2") == AQO_OK);
    CHECK(std::string(aqo_last_error()).empty());
}

TEST_CASE("null-pointer guards") {
    CHECK(aqo_config_set(nullptr, "omega", "1") == AQO_ERR_CONFIG);
    Config cfg;
    CHECK(aqo_config_set(cfg.p, nullptr, "1") == AQO_ERR_CONFIG);
    CHECK(aqo_config_canonical(cfg.p, nullptr) == AQO_ERR_CONFIG);
    CHECK(aqo_run(cfg.p, "spectrum", nullptr) == AQO_ERR_CONFIG);
    aqo_result* res = nullptr;
    CHECK(aqo_run(nullptr, "spectrum", &res) == AQO_ERR_CONFIG);
    CHECK(aqo_result_json(nullptr) == nullptr);
    CHECK(aqo_result_csv(nullptr) == nullptr);
    aqo_result_destroy(nullptr);  // must be a no-op
    aqo_string_free(nullptr);
}

TEST_CASE("unknown command and non-runnable model") {
    Config cfg;
    aqo_result* res = nullptr;
    CHECK(aqo_run(cfg.p, "frobnicate", &res) == AQO_ERR_CONFIG);
    CHECK(res == nullptr);
    CHECK(cfg.set("model", "custom") == AQO_OK);
    CHECK(aqo_run(cfg.p, "spectrum", &res) == AQO_ERR_CONFIG);
    CHECK(std::string(aqo_last_error()).find("custom") != std::string::npos);
}

TEST_CASE("spectrum bundle validates against its schema") {
    Config cfg;
    REQUIRE(cfg.set("grid", "101") == AQO_OK);
    const json bundle = run_checked(cfg, "spectrum");
    CHECK(bundle["command"] == "spectrum");
    CHECK(bundle["outputs"]["blocks"].size() == 4);
    CHECK(bundle["outputs"]["max_eigenvalue_drift"].get<double>() < 1e-10);

    Result res;
    REQUIRE(aqo_run(cfg.p, "spectrum", &res.p) == AQO_OK);
    CHECK(aqo_result_csv(res.p) == nullptr);  // no CSV form for this command
}

TEST_CASE("crossover: CSV shape and byte-identical reruns") {
    Config cfg;
    REQUIRE(cfg.set("grid", "201") == AQO_OK);
    REQUIRE(cfg.set("T-grid", "5:50:3:log") == AQO_OK);

    const json bundle = run_checked(cfg, "crossover");
    CHECK(bundle["outputs"]["T"].size() == 3);
    CHECK(bundle["outputs"]["block_count"] == 4);

    Result r1, r2;
    REQUIRE(aqo_run(cfg.p, "crossover", &r1.p) == AQO_OK);
    REQUIRE(aqo_run(cfg.p, "crossover", &r2.p) == AQO_OK);
    const std::string json1 = aqo_result_json(r1.p);
    const std::string csv1 = aqo_result_csv(r1.p);
    CHECK(json1 == std::string(aqo_result_json(r2.p)));
    CHECK(csv1 == std::string(aqo_result_csv(r2.p)));

    CHECK(csv1.rfind("T,T2c,T3c,T4c,window_flag\n", 0) == 0);
    CHECK(std::count(csv1.begin(), csv1.end(), '\n') == 4);  // header + 3 rows
}

TEST_CASE("sweep merges per-lambda runs deterministically") {
    Config cfg;
    REQUIRE(cfg.set("grid", "201") == AQO_OK);
    REQUIRE(cfg.set("lambda", "0.1 0.2") == AQO_OK);
    REQUIRE(cfg.set("T-grid", "11:11:1") == AQO_OK);

    const json bundle = run_checked(cfg, "sweep");
    REQUIRE(bundle["outputs"]["runs"].size() == 2);
    CHECK(bundle["outputs"]["runs"][0]["lambda"] == 0.1);
    CHECK(bundle["outputs"]["runs"][1]["lambda"] == 0.2);

    Result r1, r2;
    REQUIRE(aqo_run(cfg.p, "sweep", &r1.p) == AQO_OK);
    REQUIRE(aqo_run(cfg.p, "sweep", &r2.p) == AQO_OK);
    const std::string csv1 = aqo_result_csv(r1.p);
    CHECK(std::string(aqo_result_json(r1.p)) == aqo_result_json(r2.p));
    CHECK(csv1 == std::string(aqo_result_csv(r2.p)));
    CHECK(csv1.rfind("lambda,T,T2c,T3c,T4c,window_flag\n", 0) == 0);
    CHECK(csv1.find("\n0.1,11,") != std::string::npos);
    CHECK(csv1.find("\n0.2,11,") != std::string::npos);
}

TEST_CASE("evolve bundle validates and matches the closed form") {
    Config cfg;
    REQUIRE(cfg.set("grid", "401") == AQO_OK);
    REQUIRE(cfg.set("steps", "400") == AQO_OK);
    const json bundle = run_checked(cfg, "evolve");
    const json& out = bundle["outputs"];
    CHECK(out.contains("analytic"));
    // Accuracy at production grids is covered elsewhere; this guards wiring.
    CHECK(out["distances"]["adiabatic_analytic"].get<double>() < 1e-4);
    CHECK(out["adiabatic"]["diagnostics"]["trace_error"].get<double>() < 1e-10);
    CHECK(out["trajectory"]["exact"]["s"].size() == 21);
}

TEST_CASE("optimal: closed-form run time with window feasibility") {
    Config cfg;
    REQUIRE(cfg.set("grid", "401") == AQO_OK);
    const json bundle = run_checked(cfg, "optimal");
    const json& out = bundle["outputs"];
    CHECK(out["T_star"].get<double>() ==
          doctest::Approx(11.157177565710488).epsilon(1e-9));
    CHECK(out["feasible"] == true);
    CHECK(out["success_at_T_star"].get<double>() == doctest::Approx(0.9));

    // Narrow targets push T* below the adiabaticity window.
    Config tight;
    REQUIRE(tight.set("grid", "401") == AQO_OK);
    REQUIRE(tight.set("lambda", "0.3") == AQO_OK);
    REQUIRE(tight.set("target", "0.999") == AQO_OK);
    const json b2 = run_checked(tight, "optimal");
    CHECK(b2["outputs"]["feasible"] == false);

    Config bad;
    REQUIRE(bad.set("target", "0.5") == AQO_OK);
    aqo_result* res = nullptr;
    CHECK(aqo_run(bad.p, "optimal", &res) == AQO_ERR_CONFIG);
}

TEST_CASE("check-theorem1 bundle validates and passes for dephasing") {
    Config cfg;
    REQUIRE(cfg.set("theorem-grid", "21") == AQO_OK);
    REQUIRE(cfg.set("grid", "101") == AQO_OK);
    const json bundle = run_checked(cfg, "check-theorem1");
    const json& out = bundle["outputs"];
    CHECK(out["checks"]["pass"] == true);
    CHECK(out["commutator_residual"].get<double>() < 1e-10);
    CHECK(out["spectrum"]["block_structure"] == "all-one-dimensional");
}

TEST_CASE("defective generator surfaces as a structural error") {
    // lambda = 1 makes two eigenvalues collide into a genuine Jordan block,
    // which the crossover analysis cannot use.
    Config cfg;
    REQUIRE(cfg.set("grid", "51") == AQO_OK);
    REQUIRE(cfg.set("lambda", "1") == AQO_OK);
    aqo_result* res = nullptr;
    CHECK(aqo_run(cfg.p, "crossover", &res) == AQO_ERR_STRUCTURAL);
    CHECK(res == nullptr);
    CHECK_FALSE(std::string(aqo_last_error()).empty());
}
