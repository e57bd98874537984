#include "aqo/pipelines.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <sstream>

#include "aqo/adiabatic.hpp"
#include "aqo/dj.hpp"
#include "aqo/errors.hpp"
#include "aqo/evolve.hpp"
#include "aqo/operator_algebra.hpp"
#include "aqo/spectral.hpp"
#include "aqo/theorem_gap.hpp"

namespace aqo {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";
constexpr double kPi = 3.14159265358979323846;

// Shortest round-trip decimal representation (deterministic across runs).
std::string num_str(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string csv_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "': cannot parse number '" +
                              value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "': cannot parse integer '" +
                              value + "'");
    }
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

json cx_json(cx z) { return json{{"im", z.imag()}, {"re", z.real()}}; }

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json vec_components(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i).real());
    return arr;
}

std::vector<std::size_t> decimate_indices(std::size_t n, std::size_t keep) {
    std::vector<std::size_t> idx;
    if (n == 0) return idx;
    keep = std::min(keep, n);
    for (std::size_t i = 0; i < keep; ++i)
        idx.push_back((i * (n - 1)) / (keep > 1 ? keep - 1 : 1));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

// Canonical balanced table for n qubits: the upper half of the inputs is
// marked, i.e. the low 2^(n-1) bits of the MSB-first bit table are ones.
std::string default_balanced_f(int n) {
    const unsigned long long ones =
        (1ULL << (1ULL << static_cast<unsigned>(n - 1))) - 1ULL;
    std::ostringstream os;
    os << "balanced:" << std::hex << ones;
    return os.str();
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "model") {
        if (value != "dj" && value != "custom")
            throw InvalidArgument("config key 'model': must be 'dj' or 'custom'");
        model = value;
    } else if (key == "n-qubits") {
        const int v = parse_int(key, value);
        if (v < 1 || v > kMaxQubits)
            throw InvalidArgument("config key 'n-qubits': out of range [1, " +
                                  std::to_string(kMaxQubits) + "]");
        n_qubits = v;
        if (!f_explicit) f = default_balanced_f(v);
    } else if (key == "f") {
        f = value;
        f_explicit = true;
    } else if (key == "omega") {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) throw InvalidArgument("config key 'omega': must be > 0");
        omega = v;
    } else if (key == "lambda") {
        std::vector<double> vals;
        std::istringstream is(value);
        std::string tok;
        while (is >> tok) vals.push_back(parse_double(key, tok));
        if (vals.empty()) throw InvalidArgument("config key 'lambda': empty list");
        lambda = std::move(vals);
    } else if (key == "T") {
        T = parse_double(key, value);
    } else if (key == "T-grid") {
        if (!value.empty()) parse_T_grid(value);  // validate now, store as text
        T_grid = value;
    } else if (key == "grid") {
        const int v = parse_int(key, value);
        if (v < 2) throw InvalidArgument("config key 'grid': needs >= 2 points");
        grid = v;
    } else if (key == "theorem-grid") {
        const int v = parse_int(key, value);
        if (v < 2) throw InvalidArgument("config key 'theorem-grid': needs >= 2 points");
        theorem_grid = v;
    } else if (key == "steps") {
        const int v = parse_int(key, value);
        if (v < 100) throw InvalidArgument("config key 'steps': needs >= 100");
        steps = v;
    } else if (key == "target") {
        target = parse_double(key, value);
    } else if (key == "margin") {
        const double v = parse_double(key, value);
        if (!(v > 0.0)) throw InvalidArgument("config key 'margin': must be > 0");
        margin = v;
    } else if (key == "format") {
        if (value != "json" && value != "csv")
            throw InvalidArgument("config key 'format': must be 'json' or 'csv'");
        format = value;
    } else if (key == "out") {
        out = value;
    } else {
        throw InvalidArgument("unknown config key '" + key + "'");
    }
}

void RunConfig::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("config line " + std::to_string(lineno) +
                                  ": expected key=value, got '" + t + "'");
        try {
            set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
        } catch (const InvalidArgument& e) {
            throw InvalidArgument("config line " + std::to_string(lineno) + ": " +
                                  e.what());
        }
    }
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "model=" << model << "\n";
    os << "n-qubits=" << n_qubits << "\n";
    os << "f=" << f << "\n";
    os << "omega=" << num_str(omega) << "\n";
    os << "lambda=";
    for (std::size_t i = 0; i < lambda.size(); ++i)
        os << (i ? " " : "") << num_str(lambda[i]);
    os << "\n";
    os << "T=" << num_str(T) << "\n";
    os << "T-grid=" << T_grid << "\n";
    os << "grid=" << grid << "\n";
    os << "theorem-grid=" << theorem_grid << "\n";
    os << "steps=" << steps << "\n";
    os << "target=" << num_str(target) << "\n";
    os << "margin=" << num_str(margin) << "\n";
    os << "format=" << format << "\n";
    os << "out=" << out << "\n";
    return os.str();
}

std::vector<double> parse_T_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3 && parts.size() != 4)
        throw InvalidArgument("T-grid must be start:stop:points[:log], got '" +
                              text + "'");
    const double start = parse_double("T-grid", parts[0]);
    const double stop = parse_double("T-grid", parts[1]);
    const int points = parse_int("T-grid", parts[2]);
    bool logspace = false;
    if (parts.size() == 4) {
        if (parts[3] != "log" && parts[3] != "linear")
            throw InvalidArgument("T-grid scale must be 'log' or 'linear'");
        logspace = parts[3] == "log";
    }
    if (points < 1) throw InvalidArgument("T-grid needs at least 1 point");
    if (!(start > 0.0)) throw InvalidArgument("T-grid start must be positive");
    if (points == 1) {
        if (stop != start)
            throw InvalidArgument("single-point T-grid needs stop == start");
        return {start};
    }
    if (!(stop > start)) throw InvalidArgument("T-grid needs stop > start");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / (points - 1);
        g[static_cast<std::size_t>(k)] =
            logspace ? start * std::pow(stop / start, t) : start + t * (stop - start);
    }
    g.back() = stop;
    return g;
}

namespace {

// ----- shared model assembly --------------------------------------------------

DJInstance instance_from(const RunConfig& cfg) {
    if (cfg.model != "dj")
        throw InvalidArgument("model '" + cfg.model +
                              "' has no command-line constructor; only the "
                              "built-in 'dj' family runs here (custom "
                              "generator families are a library feature)");
    return make_dj_instance(cfg.n_qubits, cfg.f, cfg.lambda, cfg.omega);
}

json inputs_echo(const RunConfig& cfg) {
    json lam = json::array();
    for (double l : cfg.lambda) lam.push_back(l);
    return json{{"T", cfg.T},
                {"T-grid", cfg.T_grid},
                {"f", cfg.f},
                {"format", cfg.format},
                {"grid", cfg.grid},
                {"lambda", lam},
                {"margin", cfg.margin},
                {"model", cfg.model},
                {"n-qubits", cfg.n_qubits},
                {"omega", cfg.omega},
                {"out", cfg.out},
                {"steps", cfg.steps},
                {"target", cfg.target},
                {"theorem-grid", cfg.theorem_grid}};
}

json provenance(const RunConfig& cfg, const std::string& transport_mode) {
    json p{{"version", kVersion},
           {"gauge", "unit leading Pauli coefficient per block"},
           {"grids", json{{"s_points", cfg.grid},
                          {"steps", cfg.steps},
                          {"theorem_points", cfg.theorem_grid}}},
           {"tolerances", json{{"cluster_rel", 1e-8},
                               {"drift_rel", 1e-9},
                               {"gap_min", 1e-10},
                               {"overflow_exponent", 700.0},
                               {"rank_rel", 1e-6}}}};
    if (!transport_mode.empty()) p["transport_mode"] = transport_mode;
    return p;
}

json bundle_envelope(const RunConfig& cfg, const std::string& command,
                     json outputs, const std::string& transport_mode = "") {
    return json{{"command", command},
                {"inputs", inputs_echo(cfg)},
                {"outputs", std::move(outputs)},
                {"provenance", provenance(cfg, transport_mode)}};
}

std::vector<double> effective_T_grid(const RunConfig& cfg) {
    if (!cfg.T_grid.empty()) return parse_T_grid(cfg.T_grid);
    if (!(cfg.T > 0.0)) throw InvalidArgument("T must be positive");
    return {cfg.T};
}

struct CrossoverRun {
    CrossoverReport report;
    std::vector<cx> gamma0;
    std::vector<double> gauge_scale;
    std::vector<char> transport_overflow;  // any T, per block
};

// Full crossover computation for one scalar dephasing strength.
CrossoverRun compute_crossover(const RunConfig& cfg, double lambda_value) {
    RunConfig local = cfg;
    local.lambda = {lambda_value};
    const DJInstance inst = instance_from(local);
    const GeneratorFamily fam = dj_generator_family(inst);
    const OperatorBasis basis = pauli_basis(inst.n_qubits);
    const FrameFamily frames = track_frames(fam, uniform_grid(cfg.grid));
    const CouplingKernel kernel = coupling_kernel(frames, fam);
    const Mat K = hamiltonian_superop(-(kPi / 2.0) * dj_oracle_unitary(inst), basis);
    const int dim = 1 << inst.n_qubits;
    const Mat rho0 =
        Mat::Constant(dim, dim, cx{1.0 / static_cast<double>(dim), 0.0});

    CrossoverRun run;
    run.transport_overflow.assign(static_cast<std::size_t>(kernel.m), 0);
    auto tables_for_T = [&](double T) {
        const TransportCoefficients tc =
            transport_exact_conjugated(frames, rho0, T, K);
        for (std::size_t b = 0; b < tc.overflow.size(); ++b)
            if (tc.overflow[b]) run.transport_overflow[b] = 1;
        return bind_transport(kernel, tc);
    };
    run.report = adiabaticity_window(tables_for_T, effective_T_grid(cfg), cfg.margin);
    run.gamma0 = kernel.gamma0;
    run.gauge_scale = kernel.gauge_scale;
    return run;
}

json crossover_outputs(const CrossoverRun& run) {
    const CrossoverReport& rep = run.report;
    json Tc = json::array();
    for (const auto& row : rep.Tc) {
        json r = json::array();
        for (double v : row) r.push_back(finite_or_null(v));
        Tc.push_back(std::move(r));
    }
    json intervals = json::array();
    for (const auto& iv : rep.window_intervals)
        intervals.push_back(json::array({iv.first, iv.second}));
    json gamma0 = json::array();
    for (cx g : run.gamma0) gamma0.push_back(cx_json(g));
    json onset = json::array();
    for (double v : rep.divergence_onset) onset.push_back(finite_or_null(v));
    json max_Tc = json::array();
    for (double v : rep.max_Tc) max_Tc.push_back(finite_or_null(v));
    json margin_achieved = json::array();
    for (double v : rep.margin_achieved) margin_achieved.push_back(finite_or_null(v));
    return json{{"T", rep.T_grid},
                {"Tc", Tc},
                {"block_count", rep.m},
                {"divergence_onset", onset},
                {"divergent", std::vector<int>(rep.divergent.begin(), rep.divergent.end())},
                {"eigenvalues0", gamma0},
                {"gauge_scale", run.gauge_scale},
                {"in_window", std::vector<int>(rep.in_window.begin(), rep.in_window.end())},
                {"margin", rep.margin},
                {"margin_achieved", margin_achieved},
                {"max_Tc", max_Tc},
                {"transport_overflow",
                 std::vector<int>(run.transport_overflow.begin(),
                                  run.transport_overflow.end())},
                {"window_intervals", intervals}};
}

std::string crossover_csv_header(int m, bool with_lambda) {
    std::string h = with_lambda ? "lambda,T" : "T";
    for (int b = 2; b <= m; ++b) h += ",T" + std::to_string(b) + "c";
    h += ",window_flag\n";
    return h;
}

void crossover_csv_rows(std::string& out, const CrossoverRun& run,
                        const double* lambda_value) {
    const CrossoverReport& rep = run.report;
    for (std::size_t t = 0; t < rep.T_grid.size(); ++t) {
        std::string row;
        if (lambda_value != nullptr) row += csv_num(*lambda_value) + ",";
        row += csv_num(rep.T_grid[t]);
        for (int b = 1; b < rep.m; ++b)
            row += "," + csv_num(rep.Tc[t][static_cast<std::size_t>(b)]);
        row += ",";
        row += rep.in_window[t] ? '1' : '0';
        row += "\n";
        out += row;
    }
}

json measurement_json(const MeasurementReport& m) {
    json j{{"min_eigenvalue", m.min_eigenvalue},
           {"p_minus", m.p_minus},
           {"p_plus", m.p_plus},
           {"purity", m.purity}};
    if (std::isfinite(m.trace_distance_to_reference))
        j["trace_distance_to_reference"] = m.trace_distance_to_reference;
    return j;
}

json trajectory_json(const Trajectory& traj, std::size_t keep) {
    const auto idx = decimate_indices(traj.grid.size(), keep);
    json s = json::array(), states = json::array();
    for (std::size_t i : idx) {
        s.push_back(traj.grid[i]);
        states.push_back(vec_components(traj.states[i]));
    }
    return json{{"components", states},
                {"method", traj.method},
                {"s", s},
                {"steps", traj.steps}};
}

struct TrajectoryDiagnostics {
    double trace_error = 0.0;
    double hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double final_purity = 0.0;
};

TrajectoryDiagnostics diagnose(const Trajectory& traj, const OperatorBasis& basis) {
    TrajectoryDiagnostics d;
    const double root = std::sqrt(static_cast<double>(basis.norm_c));
    bool first = true;
    for (const Vec& v : traj.states) {
        d.trace_error = std::max(d.trace_error, std::abs(v(0).real() * root - 1.0));
        d.trace_error = std::max(d.trace_error, std::abs(v(0).imag()) * root);
        const Mat rho = devectorize(v, basis);
        d.hermiticity_error = std::max(
            d.hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()),
                                              Eigen::EigenvaluesOnly);
        const double mn = es.eigenvalues().minCoeff();
        if (first || mn < d.min_eigenvalue) d.min_eigenvalue = mn;
        first = false;
    }
    const Mat rho_final = devectorize(traj.states.back(), basis);
    d.final_purity = (rho_final * rho_final).trace().real();
    return d;
}

json diagnostics_json(const TrajectoryDiagnostics& d) {
    return json{{"final_purity", d.final_purity},
                {"hermiticity_error", d.hermiticity_error},
                {"min_eigenvalue", d.min_eigenvalue},
                {"trace_error", d.trace_error}};
}

}  // namespace

RunResult cmd_spectrum(const RunConfig& cfg) {
    const DJInstance inst = instance_from(cfg);
    const GeneratorFamily fam = dj_generator_family(inst);
    const JordanFrame frame = analyze(fam.L(0.0));

    json blocks = json::array();
    for (const JordanBlock& b : frame.blocks)
        blocks.push_back(json{{"cluster", b.cluster_id},
                              {"dim", b.dim},
                              {"eigenvalue", cx_json(b.eigenvalue)}});

    const std::vector<double> sgrid = uniform_grid(std::min(cfg.grid, 201));
    const auto paths = track_eigenvalue_paths(fam, sgrid);
    double max_drift = 0.0;
    for (const auto& path : paths)
        for (const cx& v : path)
            max_drift = std::max(max_drift, std::abs(v - path.front()));

    const auto idx = decimate_indices(sgrid.size(), 21);
    json s_values = json::array();
    json path_json = json::array();
    for (const auto& path : paths) {
        json p = json::array();
        for (std::size_t i : idx) p.push_back(cx_json(path[i]));
        path_json.push_back(std::move(p));
    }
    for (std::size_t i : idx) s_values.push_back(sgrid[i]);

    const FrameResiduals res = verify_jordan_relations(fam.L(0.0), frame);
    json outputs{{"blocks", blocks},
                 {"cluster_tol", frame.spectrum.cluster_tol_used},
                 {"diagonalizable", frame.spectrum.diagonalizable},
                 {"eigenvalue_paths", path_json},
                 {"frame_residuals", json{{"biorthonormality", res.biorthonormality},
                                          {"left_chain", res.left_chain},
                                          {"reconstruction", res.reconstruction},
                                          {"right_chain", res.right_chain}}},
                 {"matrix_norm", frame.spectrum.matrix_norm},
                 {"max_eigenvalue_drift", max_drift},
                 {"s_values", s_values}};
    return RunResult{bundle_envelope(cfg, "spectrum", std::move(outputs)), std::nullopt};
}

RunResult cmd_crossover(const RunConfig& cfg) {
    if (cfg.lambda.size() != 1 && static_cast<int>(cfg.lambda.size()) != cfg.n_qubits)
        throw InvalidArgument("crossover needs one lambda (or one per qubit)");
    // Per-qubit lists collapse to the scalar case only when all are equal;
    // the tables themselves support any instance, so just run the instance.
    const DJInstance inst = instance_from(cfg);
    const GeneratorFamily fam = dj_generator_family(inst);
    const OperatorBasis basis = pauli_basis(inst.n_qubits);
    const FrameFamily frames = track_frames(fam, uniform_grid(cfg.grid));
    const CouplingKernel kernel = coupling_kernel(frames, fam);
    const Mat K = hamiltonian_superop(-(kPi / 2.0) * dj_oracle_unitary(inst), basis);
    const int dim = 1 << inst.n_qubits;
    const Mat rho0 =
        Mat::Constant(dim, dim, cx{1.0 / static_cast<double>(dim), 0.0});

    CrossoverRun run;
    run.transport_overflow.assign(static_cast<std::size_t>(kernel.m), 0);
    auto tables_for_T = [&](double T) {
        const TransportCoefficients tc =
            transport_exact_conjugated(frames, rho0, T, K);
        for (std::size_t b = 0; b < tc.overflow.size(); ++b)
            if (tc.overflow[b]) run.transport_overflow[b] = 1;
        return bind_transport(kernel, tc);
    };
    run.report = adiabaticity_window(tables_for_T, effective_T_grid(cfg), cfg.margin);
    run.gamma0 = kernel.gamma0;
    run.gauge_scale = kernel.gauge_scale;

    std::string csv = crossover_csv_header(run.report.m, false);
    crossover_csv_rows(csv, run, nullptr);
    return RunResult{
        bundle_envelope(cfg, "crossover", crossover_outputs(run), "exact-conjugated"),
        csv};
}

RunResult cmd_evolve(const RunConfig& cfg) {
    const DJInstance inst = instance_from(cfg);
    const GeneratorFamily fam = dj_generator_family(inst);
    const OperatorBasis basis = pauli_basis(inst.n_qubits);
    if (!(cfg.T > 0.0)) throw InvalidArgument("T must be positive");
    const int dim = 1 << inst.n_qubits;
    const Mat rho0 =
        Mat::Constant(dim, dim, cx{1.0 / static_cast<double>(dim), 0.0});

    const Trajectory exact = exact_evolve(fam, rho0, cfg.T, cfg.steps);
    const FrameFamily frames = track_frames(fam, uniform_grid(cfg.grid));
    const Trajectory adiabatic = adiabatic_evolve(frames, rho0, cfg.T);

    const Mat rho_exact = devectorize(exact.states.back(), basis);
    const Mat rho_adiabatic = devectorize(adiabatic.states.back(), basis);

    json outputs{
        {"T", cfg.T},
        {"adiabatic",
         json{{"diagnostics", diagnostics_json(diagnose(adiabatic, basis))},
              {"measurement", measurement_json(measure_plus_minus(rho_adiabatic))},
              {"success", dj_ground_state_overlap(rho_adiabatic, inst)}}},
        {"distances",
         json{{"exact_adiabatic", compare_states(rho_exact, rho_adiabatic).trace}}},
        {"exact",
         json{{"diagnostics", diagnostics_json(diagnose(exact, basis))},
              {"measurement", measurement_json(measure_plus_minus(rho_exact))},
              {"success", dj_ground_state_overlap(rho_exact, inst)}}},
        {"trajectory",
         json{{"adiabatic", trajectory_json(adiabatic, 21)},
              {"exact", trajectory_json(exact, 21)}}}};

    const bool uniform_lambda =
        std::all_of(inst.lambdas.begin(), inst.lambdas.end(),
                    [&](double l) { return l == inst.lambdas.front(); });
    if (inst.n_qubits == 1 && uniform_lambda && inst.lambdas.front() < 1.0) {
        const Mat rho_an = dj_final_state_analytic(cfg.T, inst.lambdas.front(), inst.f);
        const DJSuccess an = dj_success_probability(cfg.T, inst.lambdas.front(), inst.f);
        outputs["analytic"] = json{{"p_minus", an.p_minus},
                                   {"p_plus", an.p_plus},
                                   {"success", an.success}};
        outputs["distances"]["adiabatic_analytic"] =
            compare_states(rho_adiabatic, rho_an).trace;
        outputs["distances"]["exact_analytic"] =
            compare_states(rho_exact, rho_an).trace;
    }
    return RunResult{bundle_envelope(cfg, "evolve", std::move(outputs), "decoupled"),
                     std::nullopt};
}

RunResult cmd_optimal(const RunConfig& cfg) {
    const DJInstance inst = instance_from(cfg);
    const bool uniform_lambda =
        std::all_of(inst.lambdas.begin(), inst.lambdas.end(),
                    [&](double l) { return l == inst.lambdas.front(); });
    if (inst.n_qubits != 1 || !uniform_lambda)
        throw InvalidArgument("optimal run-time uses the one-qubit closed form; "
                              "set n-qubits=1 with a single lambda");
    const double lam = inst.lambdas.front();
    const double T_star = dj_optimal_runtime(lam, cfg.target);

    RunConfig at_T = cfg;
    at_T.T = T_star;
    at_T.T_grid.clear();
    const CrossoverRun run = compute_crossover(at_T, lam);
    const double max_Tc = run.report.max_Tc.front();
    const double margin_achieved = run.report.margin_achieved.front();
    const bool window_satisfied = run.report.in_window.front() != 0;

    json Tc = json::array();
    for (double v : run.report.Tc.front()) Tc.push_back(finite_or_null(v));
    const DJSuccess an = dj_success_probability(T_star, lam, inst.f);
    json outputs{{"T_star", T_star},
                 {"crossover_at_T_star", Tc},
                 {"feasible", window_satisfied},
                 {"margin", cfg.margin},
                 {"margin_achieved", finite_or_null(margin_achieved)},
                 {"max_crossover_at_T_star", finite_or_null(max_Tc)},
                 {"success_at_T_star", an.success},
                 {"target", cfg.target},
                 {"window_satisfied", window_satisfied}};
    return RunResult{
        bundle_envelope(cfg, "optimal", std::move(outputs), "exact-conjugated"),
        std::nullopt};
}

RunResult cmd_check_theorem1(const RunConfig& cfg) {
    const DJInstance inst = instance_from(cfg);
    const GeneratorFamily fam = dj_generator_family(inst);
    const OperatorBasis basis = pauli_basis(inst.n_qubits);
    const std::vector<double> grid = uniform_grid(cfg.theorem_grid);

    // V(s) acts as rho -> u^dag rho u with u = Utilde(s)^dag, so that
    // V applied to H(0) reproduces H(s).
    const auto u_fam = [inst](double s) {
        return dj_interpolation_unitary(inst, s).adjoint().eval();
    };
    const ConjugationFamily V = conjugation_superop(u_fam, basis);
    const Mat R = dissipator_superop(dj_lindblad_ops(inst), basis);
    const auto R_const = [R](double) { return R; };

    const double commutator = commutator_check(R, V, grid);
    const double sufficient = sufficient_condition_check(R_const, V, grid);
    const double necessity = necessity_probe(R_const, V, grid);
    const SpectralDriftReport drift = constant_spectrum_check(fam, grid);

    const bool commutator_pass = commutator < 1e-10;
    const bool spectrum_pass = drift.constant;
    json outputs{{"checks",
                  json{{"commutator_pass", commutator_pass},
                       {"constant_spectrum_pass", spectrum_pass},
                       {"pass", commutator_pass && spectrum_pass}}},
                 {"commutator_residual", commutator},
                 {"necessity_residual", necessity},
                 {"spectrum", json{{"all_one_dim", drift.all_one_dim},
                                   {"block_structure", drift.block_structure},
                                   {"constant", drift.constant},
                                   {"max_drift", drift.max_drift},
                                   {"threshold", drift.threshold}}},
                 {"sufficient_residual", sufficient},
                 {"unitarity_residual", V.unitarity_residual}};
    return RunResult{bundle_envelope(cfg, "check-theorem1", std::move(outputs)),
                     std::nullopt};
}

RunResult cmd_sweep(const RunConfig& cfg) {
    // One crossover run per dephasing strength, computed concurrently and
    // merged in input order so the output is byte-stable.
    std::vector<std::future<CrossoverRun>> futures;
    futures.reserve(cfg.lambda.size());
    for (double lam : cfg.lambda)
        futures.push_back(std::async(std::launch::async, [&cfg, lam] {
            return compute_crossover(cfg, lam);
        }));

    json runs = json::array();
    std::string csv;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const CrossoverRun run = futures[i].get();
        if (i == 0) csv = crossover_csv_header(run.report.m, true);
        crossover_csv_rows(csv, run, &cfg.lambda[i]);
        json entry = crossover_outputs(run);
        entry["lambda"] = cfg.lambda[i];
        runs.push_back(std::move(entry));
    }
    json outputs{{"lambda", cfg.lambda}, {"runs", runs}};
    return RunResult{
        bundle_envelope(cfg, "sweep", std::move(outputs), "exact-conjugated"), csv};
}

RunResult run_command(const RunConfig& cfg, const std::string& command) {
    if (command == "spectrum") return cmd_spectrum(cfg);
    if (command == "crossover") return cmd_crossover(cfg);
    if (command == "evolve") return cmd_evolve(cfg);
    if (command == "optimal") return cmd_optimal(cfg);
    if (command == "check-theorem1") return cmd_check_theorem1(cfg);
    if (command == "sweep") return cmd_sweep(cfg);
    throw InvalidArgument("unknown command '" + command + "'");
}

const char* version() { return kVersion; }

}  // namespace aqo
