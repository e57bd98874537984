#pragma once

// Batch front end shared by the C API and the command-line tool: a canonical
// key-value run configuration and the implementations of the analysis
// commands, each returning a deterministic JSON result bundle (and a CSV
// rendering for grid-shaped outputs).
//
// Determinism contract: identical configurations produce byte-identical
// bundles.  Nothing time- or host-dependent enters the output; wall-clock
// timing is the caller's concern (the CLI prints it to stderr).

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace aqo {

/// Run configuration.  Keys mirror the CLI long flag names.
struct RunConfig {
    std::string model = "dj";
    int n_qubits = 1;
    /// Marked function.  Defaults to the canonical balanced table for the
    /// current qubit count (upper half of inputs marked) and follows
    /// `n-qubits` until set explicitly.
    std::string f = "balanced:1";
    double omega = 1.0;
    std::vector<double> lambda{0.1};
    double T = 11.0;
    std::string T_grid;        ///< "start:stop:points[:log]"; empty = single T
    int grid = 2001;           ///< s-grid points for tracking/quadrature
    int theorem_grid = 201;    ///< s-grid points for the theorem checks
    int steps = 2000;          ///< exact-integrator steps
    double target = 0.9;       ///< success probability for `optimal`
    double margin = 5.0;       ///< adiabatic-window ratio
    std::string format = "json";  ///< "json" | "csv"
    std::string out;           ///< output path; empty = stdout
    bool f_explicit = false;   ///< true once `f` was set by the user

    /// Applies one key=value pair (keys as in the canonical form).
    /// Throws InvalidArgument for unknown keys or unparsable values.
    void set(const std::string& key, const std::string& value);

    /// Parses canonical key-value text (# comments, blank lines allowed).
    void parse(const std::string& text);

    /// Canonical textual form; parse(canonical()) reproduces it byte-for-byte.
    std::string canonical() const;
};

/// Expands "start:stop:points[:log]" into an ascending grid.
std::vector<double> parse_T_grid(const std::string& text);

/// Result of one command: the JSON bundle and, for grid-shaped commands
/// (crossover, sweep), a CSV rendering.
struct RunResult {
    nlohmann::json bundle;
    std::optional<std::string> csv;
};

RunResult cmd_spectrum(const RunConfig& cfg);
RunResult cmd_crossover(const RunConfig& cfg);
RunResult cmd_evolve(const RunConfig& cfg);
RunResult cmd_optimal(const RunConfig& cfg);
RunResult cmd_check_theorem1(const RunConfig& cfg);
RunResult cmd_sweep(const RunConfig& cfg);

/// Dispatches on the command name ("spectrum", "crossover", "evolve",
/// "optimal", "check-theorem1", "sweep").  Throws InvalidArgument for an
/// unknown command.
RunResult run_command(const RunConfig& cfg, const std::string& command);

/// Library version string.
const char* version();

}  // namespace aqo
