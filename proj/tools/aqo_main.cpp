// Command-line front end.  Flag handling only: every value is passed through
// the C API as text, so validation, defaulting, and canonicalization live in
// one place and library users get identical behavior.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aqo.h"

namespace {

struct Options {
    std::string config_path;
    bool dump_config = false;
    std::vector<std::string> lambda;
    std::map<std::string, std::string> single;  // config key -> raw value
};

// Flags that map one-to-one onto config keys.
const std::vector<std::pair<std::string, std::string>> kKeyFlags = {
    {"model", "Model family (dj)"},
    {"n-qubits", "Number of qubits"},
    {"f", "Marked function: constant0 | constant1 | balanced:<hex bitmask>"},
    {"omega", "Energy scale of the driver Hamiltonian"},
    {"T", "Total run time in units of 1/omega"},
    {"T-grid", "Run-time grid start:stop:points[:log]"},
    {"grid", "Interpolation points for spectral-frame tracking"},
    {"theorem-grid", "Probe points for invariance checks"},
    {"steps", "Integrator steps for exact evolution"},
    {"target", "Target success probability"},
    {"margin", "Safety factor defining the adiabatic window"},
    {"format", "Output format: json | csv"},
    {"out", "Write output to this path instead of stdout"},
};

void add_common(CLI::App* sub, Options& opt) {
    sub->add_option("--config", opt.config_path,
                    "Config file (key=value lines, '#' comments) applied "
                    "before flags");
    for (const auto& [key, help] : kKeyFlags)
        sub->add_option("--" + key, opt.single[key], help);
    sub->add_option("--lambda", opt.lambda,
                    "Dephasing strengths (one per qubit, or one shared)")
        ->delimiter(',');
    sub->add_flag("--dump-config", opt.dump_config,
                  "Print the canonical configuration and exit");
}

int fail(aqo_status status, const std::string& context) {
    std::fprintf(stderr, "error: %s: %s\n", context.c_str(), aqo_last_error());
    return static_cast<int>(status);
}

// Pull one value out of the canonical config text.
std::string canonical_value(const std::string& canonical, const std::string& key) {
    std::istringstream is(canonical);
    std::string line;
    while (std::getline(is, line))
        if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
    return "";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral analysis, adiabaticity crossover times, and "
                 "open-system evolution for interpolating Lindblad generators"};
    app.set_version_flag("--version", aqo_version());
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"spectrum", "Jordan-frame analysis and eigenvalue paths of L(s)"},
        {"crossover", "Per-block crossover times and the adiabatic window"},
        {"evolve", "Exact and adiabatic evolution with physicality checks"},
        {"optimal", "Longest run time keeping the target success, with window feasibility"},
        {"check-theorem1", "Constant-gap conditions: conjugation-invariance "
                           "of the dissipator and spectral drift"},
        {"sweep", "Crossover runs over a list of dephasing strengths"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        add_common(sub, opt);
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 2;
    }

    std::string command;
    CLI::App* active = nullptr;
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) {
            command = name;
            active = sub;
        }

    aqo_config* cfg = aqo_config_create();
    if (cfg == nullptr) {
        std::fprintf(stderr, "error: out of memory\n");
        return 3;
    }
    struct ConfigGuard {
        aqo_config* c;
        ~ConfigGuard() { aqo_config_destroy(c); }
    } cfg_guard{cfg};

    if (active->count("--config") > 0) {
        std::ifstream in(opt.config_path);
        if (!in) {
            std::fprintf(stderr, "error: cannot read config file '%s'\n",
                         opt.config_path.c_str());
            return 2;
        }
        std::ostringstream body;
        body << in.rdbuf();
        if (const aqo_status st = aqo_config_parse(cfg, body.str().c_str());
            st != AQO_OK)
            return fail(st, "config file '" + opt.config_path + "'");
    }
    for (const auto& [key, value] : opt.single) {
        if (active->count("--" + key) == 0) continue;
        if (const aqo_status st = aqo_config_set(cfg, key.c_str(), value.c_str());
            st != AQO_OK)
            return fail(st, "--" + key);
    }
    if (active->count("--lambda") > 0) {
        std::string joined;
        for (const std::string& v : opt.lambda)
            joined += (joined.empty() ? "" : " ") + v;
        if (const aqo_status st = aqo_config_set(cfg, "lambda", joined.c_str());
            st != AQO_OK)
            return fail(st, "--lambda");
    }

    char* canonical_text = nullptr;
    if (const aqo_status st = aqo_config_canonical(cfg, &canonical_text);
        st != AQO_OK)
        return fail(st, "configuration");
    const std::string canonical = canonical_text;
    aqo_string_free(canonical_text);

    if (opt.dump_config) {
        std::fputs(canonical.c_str(), stdout);
        return 0;
    }

    const std::string format = canonical_value(canonical, "format");
    if (format == "csv" && command != "crossover" && command != "sweep") {
        std::fprintf(stderr,
                     "error: format=csv is only defined for 'crossover' and "
                     "'sweep'; '%s' emits JSON\n",
                     command.c_str());
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    aqo_result* result = nullptr;
    if (const aqo_status st = aqo_run(cfg, command.c_str(), &result); st != AQO_OK)
        return fail(st, command);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - t0;
    std::fprintf(stderr, "# %s finished in %.3f s\n", command.c_str(),
                 elapsed.count());

    struct ResultGuard {
        aqo_result* r;
        ~ResultGuard() { aqo_result_destroy(r); }
    } result_guard{result};

    const char* text =
        format == "csv" ? aqo_result_csv(result) : aqo_result_json(result);
    if (text == nullptr) {
        std::fprintf(stderr, "error: no %s output for '%s'\n", format.c_str(),
                     command.c_str());
        return 2;
    }

    const std::string out_path = canonical_value(canonical, "out");
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << text;
        if (!out) {
            std::fprintf(stderr, "error: cannot write output file '%s'\n",
                         out_path.c_str());
            return 2;
        }
    } else {
        std::fputs(text, stdout);
    }
    return 0;
}
