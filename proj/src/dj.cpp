#include "aqo/dj.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "aqo/errors.hpp"

namespace aqo {

namespace {

constexpr double kPi = 3.14159265358979323846;

int popcount64(std::uint64_t v) {
    int c = 0;
    while (v) {
        v &= v - 1;
        ++c;
    }
    return c;
}

Mat sigma_x() {
    Mat m(2, 2);
    m << cx{0, 0}, cx{1, 0}, cx{1, 0}, cx{0, 0};
    return m;
}

// Dense single-qubit operator embedded at `qubit` (0 = most significant).
Mat embed_single(const Mat& op, int qubit, int n) {
    const int dim = 1 << n;
    const int bit = 1 << (n - 1 - qubit);
    Mat out = Mat::Zero(dim, dim);
    for (int c = 0; c < dim; ++c) {
        const int cb = (c & bit) ? 1 : 0;
        for (int rb = 0; rb < 2; ++rb) {
            const cx val = op(rb, cb);
            if (val == cx{0, 0}) continue;
            const int r = (c & ~bit) | (rb ? bit : 0);
            out(r, c) += val;
        }
    }
    return out;
}

}  // namespace

int FSpec::operator()(int x) const {
    switch (kind) {
        case Kind::Constant0: return 0;
        case Kind::Constant1: return 1;
        case Kind::Balanced: {
            const int size = 1 << n_qubits;
            if (x < 0 || x >= size) throw InvalidArgument("function input out of range");
            return static_cast<int>((table >> (size - 1 - x)) & 1u);
        }
    }
    throw InvalidArgument("corrupt function spec");
}

std::string FSpec::to_string() const {
    switch (kind) {
        case Kind::Constant0: return "constant0";
        case Kind::Constant1: return "constant1";
        case Kind::Balanced: {
            std::ostringstream os;
            os << "balanced:" << std::hex << table;
            return os.str();
        }
    }
    return "?";
}

FSpec parse_f_spec(const std::string& text, int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw InvalidArgument("qubit count out of range [1, " +
                              std::to_string(kMaxQubits) + "]");
    FSpec f;
    f.n_qubits = n_qubits;
    if (text == "constant0") {
        f.kind = FSpec::Kind::Constant0;
        return f;
    }
    if (text == "constant1") {
        f.kind = FSpec::Kind::Constant1;
        return f;
    }
    const std::string prefix = "balanced:";
    if (text.rfind(prefix, 0) != 0)
        throw InvalidArgument("function spec must be constant0, constant1, or "
                              "balanced:<hex bit table>, got \"" + text + "\"");
    const std::string hex = text.substr(prefix.size());
    if (hex.empty() || hex.size() > 16)
        throw InvalidArgument("balanced bit table must be 1..16 hex digits");
    std::uint64_t table = 0;
    for (char ch : hex) {
        const char lo = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        int digit;
        if (lo >= '0' && lo <= '9') digit = lo - '0';
        else if (lo >= 'a' && lo <= 'f') digit = lo - 'a' + 10;
        else throw InvalidArgument(std::string("invalid hex digit '") + ch +
                                   "' in balanced bit table");
        table = (table << 4) | static_cast<std::uint64_t>(digit);
    }
    const int size = 1 << n_qubits;
    if (size < 64 && (table >> size) != 0)
        throw InvalidArgument("balanced bit table has more bits than 2^N inputs");
    if (popcount64(table) != size / 2)
        throw InvalidArgument("balanced function must output 1 on exactly half "
                              "of the " + std::to_string(size) + " inputs");
    f.kind = FSpec::Kind::Balanced;
    f.table = table;
    return f;
}

DJInstance make_dj_instance(int n_qubits, const std::string& f_spec,
                            const std::vector<double>& lambdas, double omega) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw InvalidArgument("qubit count out of range [1, " +
                              std::to_string(kMaxQubits) + "]");
    if (!(omega > 0.0)) throw InvalidArgument("omega must be positive");
    DJInstance inst;
    inst.n_qubits = n_qubits;
    inst.f = parse_f_spec(f_spec, n_qubits);
    inst.omega = omega;
    if (lambdas.empty()) {
        inst.lambdas.assign(static_cast<std::size_t>(n_qubits), 0.0);
    } else if (lambdas.size() == 1) {
        inst.lambdas.assign(static_cast<std::size_t>(n_qubits), lambdas.front());
    } else if (static_cast<int>(lambdas.size()) == n_qubits) {
        inst.lambdas = lambdas;
    } else {
        throw InvalidArgument("need one dephasing strength per qubit (or a "
                              "single value broadcast to all)");
    }
    for (double l : inst.lambdas)
        if (!(l >= 0.0)) throw InvalidArgument("dephasing strengths must be >= 0");
    return inst;
}

Mat dj_oracle_unitary(const DJInstance& inst) {
    const int dim = 1 << inst.n_qubits;
    Mat u = Mat::Zero(dim, dim);
    for (int x = 0; x < dim; ++x) u(x, x) = inst.f(x) ? cx{-1, 0} : cx{1, 0};
    return u;
}

Mat dj_interpolation_unitary(const DJInstance& inst, double s) {
    const int dim = 1 << inst.n_qubits;
    const double c = std::cos(kPi * s / 2.0), sn = std::sin(kPi * s / 2.0);
    return c * Mat::Identity(dim, dim) + cx{0, 1} * sn * dj_oracle_unitary(inst);
}

Mat dj_hamiltonian0(const DJInstance& inst) {
    const int dim = 1 << inst.n_qubits;
    Mat h = Mat::Zero(dim, dim);
    const Mat minus_proj = 0.5 * (Mat::Identity(2, 2) - sigma_x());
    for (int q = 0; q < inst.n_qubits; ++q)
        h += embed_single(minus_proj, q, inst.n_qubits);
    return inst.omega * h;
}

Mat dj_hamiltonian(const DJInstance& inst, double s) {
    const Mat ut = dj_interpolation_unitary(inst, s);
    return ut * dj_hamiltonian0(inst) * ut.adjoint();
}

Mat dj_hamiltonian_derivative(const DJInstance& inst, double s) {
    const Mat u = dj_oracle_unitary(inst);
    const Mat h = dj_hamiltonian(inst, s);
    return cx{0, kPi / 2.0} * (u * h - h * u);
}

std::vector<Mat> dj_lindblad_ops(const DJInstance& inst) {
    std::vector<Mat> ops;
    Mat sz(2, 2);
    sz << cx{1, 0}, cx{0, 0}, cx{0, 0}, cx{-1, 0};
    const double root_omega = std::sqrt(inst.omega);
    for (int q = 0; q < inst.n_qubits; ++q) {
        const double l = inst.lambda(q);
        if (l == 0.0) continue;
        ops.push_back(l * root_omega * embed_single(sz, q, inst.n_qubits));
    }
    return ops;
}

GeneratorFamily dj_generator_family(const DJInstance& inst) {
    const OperatorBasis basis = pauli_basis(inst.n_qubits);
    const Mat dissipator = dissipator_superop(dj_lindblad_ops(inst), basis);

    GeneratorFamily fam;
    fam.n_qubits = inst.n_qubits;
    fam.dim = basis.size();
    fam.name = "dj";
    fam.params["n_qubits"] = inst.n_qubits;
    fam.params["omega"] = inst.omega;
    for (int q = 0; q < inst.n_qubits; ++q)
        fam.params["lambda" + std::to_string(q)] = inst.lambda(q);
    fam.L = [inst, basis, dissipator](double s) {
        return (hamiltonian_superop(dj_hamiltonian(inst, s), basis) + dissipator).eval();
    };
    fam.dL = [inst, basis](double s) {
        return hamiltonian_superop(dj_hamiltonian_derivative(inst, s), basis);
    };
    return fam;
}

int dj_F(const FSpec& f) {
    if (f.n_qubits != 1)
        throw InvalidArgument("F is defined for the one-qubit model only");
    const auto sign = [&f](int x) { return f(x) ? -1 : 1; };
    return sign(0) - sign(1);
}

Mat dj_superop_analytic(double s, double lambda, int F, double omega) {
    if (F != 0 && F != 2 && F != -2)
        throw InvalidArgument("F must be one of {0, +2, -2}");
    const double r = -std::cos(kPi * F * s / 2.0);
    const double q = std::sin(kPi * F * s / 2.0);
    const double l2 = 2.0 * lambda * lambda;
    Mat m = Mat::Zero(4, 4);
    m(1, 1) = -l2;
    m(1, 3) = q;
    m(2, 2) = -l2;
    m(2, 3) = -r;
    m(3, 1) = -q;
    m(3, 2) = r;
    return omega * m;
}

Mat dj_final_state_analytic(double T, double lambda, const FSpec& f) {
    if (f.n_qubits != 1)
        throw InvalidArgument("analytic final state covers the one-qubit model only");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw InvalidArgument("analytic pipeline requires 0 <= lambda < 1 "
                              "(distinct generator eigenvalues)");
    if (!(T >= 0.0)) throw InvalidArgument("T must be >= 0");
    const double parity = ((f(0) + f(1)) % 2 == 0) ? 1.0 : -1.0;
    const double amp = std::exp(-2.0 * lambda * lambda * T) * parity;
    return 0.5 * (Mat::Identity(2, 2) + amp * sigma_x());
}

DJSuccess dj_success_probability(double T, double lambda, const FSpec& f) {
    if (f.n_qubits != 1)
        throw InvalidArgument("closed-form probabilities cover the one-qubit model only");
    if (!(lambda >= 0.0 && lambda < 1.0))
        throw InvalidArgument("analytic pipeline requires 0 <= lambda < 1");
    const double parity = ((f(0) + f(1)) % 2 == 0) ? 1.0 : -1.0;
    const double amp = std::exp(-2.0 * lambda * lambda * T) * parity;
    DJSuccess out;
    out.p_plus = 0.5 * (1.0 + amp);
    out.p_minus = 0.5 * (1.0 - amp);
    out.success = f.constant() ? out.p_plus : out.p_minus;
    return out;
}

double dj_optimal_runtime(double lambda, double target) {
    if (!(lambda > 0.0)) throw InvalidArgument("optimal run-time needs lambda > 0");
    if (!(target > 0.5 && target < 1.0))
        throw InvalidArgument("target success probability must lie in (0.5, 1)");
    return -std::log(2.0 * target - 1.0) / (2.0 * lambda * lambda);
}

Vec dj_ground_state(const DJInstance& inst) {
    const int dim = 1 << inst.n_qubits;
    Vec plus = Vec::Constant(dim, cx{1.0 / std::sqrt(static_cast<double>(dim)), 0.0});
    return dj_oracle_unitary(inst) * plus;
}

double dj_ground_state_overlap(const Mat& rho, const DJInstance& inst) {
    require_density_matrix(rho);
    if (rho.rows() != (1 << inst.n_qubits))
        throw InvalidArgument("state dimension does not match the instance");
    const Vec g = dj_ground_state(inst);
    const double p = (g.adjoint() * rho * g)(0, 0).real();
    return std::min(1.0, std::max(0.0, p));
}

std::function<Mat(double)> dj_unitary_family(const DJInstance& inst) {
    return [inst](double s) { return dj_interpolation_unitary(inst, s); };
}

double repeated_success(double p, int runs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probability out of [0, 1]");
    if (runs < 1 || runs % 2 == 0)
        throw InvalidArgument("majority vote needs an odd, positive run count");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    // P(majority correct) = sum_{j > runs/2} C(runs, j) p^j (1-p)^(runs-j),
    // accumulated in log space to stay finite for large run counts.
    double total = 0.0;
    for (int j = runs / 2 + 1; j <= runs; ++j) {
        double log_term = 0.0;
        for (int i = 1; i <= j; ++i)
            log_term += std::log(static_cast<double>(runs - j + i)) -
                        std::log(static_cast<double>(i));
        log_term += j * std::log(p) + (runs - j) * std::log(1.0 - p);
        total += std::exp(log_term);
    }
    return std::min(1.0, std::max(0.0, total));
}

}  // namespace aqo
