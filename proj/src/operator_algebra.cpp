#include "aqo/operator_algebra.hpp"

#include <bit>
#include <cmath>

namespace aqo {

namespace {

inline cx ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

inline int parity(std::uint32_t bits) { return std::popcount(bits) & 1; }

} // namespace

cx PauliString::entry_for_column(int col) const {
    // (X^x Z^z)|col> = (-1)^{z.col} |col ^ x>, times the global i^k phase.
    const double sign = parity(zbits & static_cast<std::uint32_t>(col)) ? -1.0 : 1.0;
    return ipow(phase_k) * sign;
}

Mat PauliString::dense() const {
    const int d = dim();
    Mat m = Mat::Zero(d, d);
    for (int col = 0; col < d; ++col)
        m(col ^ static_cast<int>(xbits), col) = entry_for_column(col);
    return m;
}

cx PauliString::trace_with(const Mat& m) const {
    // tr(F M) = sum_col F_{col^x, col} * M_{col, col^x}.
    const int d = dim();
    cx acc = 0.0;
    for (int col = 0; col < d; ++col)
        acc += entry_for_column(col) * m(col, col ^ static_cast<int>(xbits));
    return acc;
}

PauliString string_product(const PauliString& a, const PauliString& b) {
    // Z^{za} X^{xb} = (-1)^{za.xb} X^{xb} Z^{za}.
    PauliString p;
    p.n_qubits = a.n_qubits;
    p.xbits = a.xbits ^ b.xbits;
    p.zbits = a.zbits ^ b.zbits;
    p.phase_k = a.phase_k + b.phase_k + 2 * parity(a.zbits & b.xbits);
    return p;
}

OperatorBasis pauli_basis(int n_qubits) {
    if (n_qubits < 1)
        throw InvalidArgument("pauli_basis: qubit count must be >= 1");
    if (n_qubits > kMaxQubits)
        throw CapacityError("pauli_basis: dense storage supports at most " +
                            std::to_string(kMaxQubits) + " qubits");

    OperatorBasis basis;
    basis.n_qubits = n_qubits;
    basis.dim = 1 << n_qubits;
    basis.norm_c = static_cast<double>(basis.dim);

    const std::size_t count = std::size_t{1} << (2 * n_qubits);
    basis.strings.reserve(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        // Base-4 digits of idx select I/X/Y/Z per qubit; qubit 1 is the most
        // significant digit so the identity string is index 0.
        PauliString str;
        str.n_qubits = n_qubits;
        for (int q = 0; q < n_qubits; ++q) {
            const int shift = 2 * (n_qubits - 1 - q);
            const int digit = static_cast<int>((idx >> shift) & 3u);
            const std::uint32_t bit = 1u << (n_qubits - 1 - q);
            switch (digit) {
                case 1: str.xbits |= bit; break;                       // X
                case 2: str.xbits |= bit; str.zbits |= bit; ++str.phase_k; break; // Y = i X Z
                case 3: str.zbits |= bit; break;                       // Z
                default: break;                                        // I
            }
        }
        basis.strings.push_back(str);
    }
    return basis;
}

Vec vectorize(const Mat& rho, const OperatorBasis& basis) {
    if (rho.rows() != basis.dim || rho.cols() != basis.dim)
        throw InvalidArgument("vectorize: operator dimension does not match basis");
    const double scale = 1.0 / std::sqrt(basis.norm_c);
    Vec v(basis.size());
    for (int k = 0; k < basis.size(); ++k)
        v(k) = basis.strings[static_cast<std::size_t>(k)].trace_with(rho) * scale;
    return v;
}

Mat devectorize(const Vec& v, const OperatorBasis& basis) {
    if (v.size() != basis.size())
        throw InvalidArgument("devectorize: vector length does not match basis");
    const double scale = 1.0 / std::sqrt(basis.norm_c);
    Mat rho = Mat::Zero(basis.dim, basis.dim);
    for (int k = 0; k < basis.size(); ++k) {
        const PauliString& f = basis.strings[static_cast<std::size_t>(k)];
        const cx w = v(k) * scale;
        if (w == cx{0.0, 0.0}) continue;
        for (int col = 0; col < basis.dim; ++col)
            rho(col ^ static_cast<int>(f.xbits), col) += w * f.entry_for_column(col);
    }
    return rho;
}

void require_hermitian(const Mat& h, double tol_rel, const char* what) {
    const double scale = h.cwiseAbs().maxCoeff();
    const double err = (h - h.adjoint()).cwiseAbs().maxCoeff();
    if (err > tol_rel * std::max(scale, 1e-300))
        throw InvalidArgument(std::string(what) +
                              " is not Hermitian within tolerance (residual " +
                              std::to_string(err) + ")");
}

void require_density_matrix(const Mat& rho) {
    if (rho.rows() != rho.cols())
        throw InvalidArgument("density matrix must be square");
    if (std::abs(rho.trace() - cx{1.0, 0.0}) > 1e-8)
        throw InvalidArgument("density matrix trace differs from 1");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw InvalidArgument("density matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    if (es.eigenvalues().minCoeff() < -1e-7)
        throw InvalidArgument("density matrix has a negative eigenvalue");
}

Mat superop_from_action(const std::function<Mat(const Mat&)>& action,
                        const OperatorBasis& basis) {
    const int n = basis.size();
    Mat sup(n, n);
    for (int k = 0; k < n; ++k) {
        // Column k holds the expansion coefficients of action(F_k) over the
        // basis; tr(F_j F_k) = c delta_jk makes this a plain projection.
        const Mat img = action(basis.element(k));
        for (int j = 0; j < n; ++j)
            sup(j, k) = basis.strings[static_cast<std::size_t>(j)].trace_with(img) /
                        basis.norm_c;
    }
    return sup;
}

Mat hamiltonian_superop(const Mat& h, const OperatorBasis& basis) {
    if (h.rows() != basis.dim || h.cols() != basis.dim)
        throw InvalidArgument("hamiltonian_superop: dimension mismatch");
    require_hermitian(h, 1e-12, "Hamiltonian");
    const cx i{0.0, 1.0};
    return superop_from_action(
        [&](const Mat& f) -> Mat { return -i * (h * f - f * h); }, basis);
}

Mat dissipator_superop(const std::vector<Mat>& lindblad_ops,
                       const OperatorBasis& basis) {
    for (const Mat& g : lindblad_ops)
        if (g.rows() != basis.dim || g.cols() != basis.dim)
            throw InvalidArgument("dissipator_superop: dimension mismatch");
    return superop_from_action(
        [&](const Mat& f) -> Mat {
            Mat acc = Mat::Zero(basis.dim, basis.dim);
            for (const Mat& g : lindblad_ops) {
                const Mat gdg = g.adjoint() * g;
                acc += g * f * g.adjoint() - 0.5 * (gdg * f + f * gdg);
            }
            return acc;
        },
        basis);
}

Mat lindblad_superop(const Mat& h, const std::vector<Mat>& lindblad_ops,
                     const OperatorBasis& basis) {
    return hamiltonian_superop(h, basis) + dissipator_superop(lindblad_ops, basis);
}

Mat apply_lindblad_direct(const Mat& h, const std::vector<Mat>& lindblad_ops,
                          const Mat& rho) {
    const cx i{0.0, 1.0};
    Mat acc = -i * (h * rho - rho * h);
    for (const Mat& g : lindblad_ops) {
        const Mat gdg = g.adjoint() * g;
        acc += g * rho * g.adjoint() - 0.5 * (gdg * rho + rho * gdg);
    }
    return acc;
}

Mat superop_derivative(const GeneratorFamily& fam, double s, double h) {
    if (s < 0.0 || s > 1.0)
        throw InvalidArgument("superop_derivative: s must lie in [0,1]");
    if (fam.dL)
        return fam.dL(s);
    if (h <= 0.0)
        throw InvalidArgument("superop_derivative: step must be positive");
    if (s - h >= 0.0 && s + h <= 1.0)
        return (fam.L(s + h) - fam.L(s - h)) / (2.0 * h);
    // Second-order one-sided stencils at the ends of the interval.
    if (s - h < 0.0)
        return (-3.0 * fam.L(s) + 4.0 * fam.L(s + h) - fam.L(s + 2.0 * h)) /
               (2.0 * h);
    return (3.0 * fam.L(s) - 4.0 * fam.L(s - h) + fam.L(s - 2.0 * h)) /
           (2.0 * h);
}

} // namespace aqo
