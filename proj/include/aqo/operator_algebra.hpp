// Operator algebra: Hermitian Pauli-string bases, density-matrix
// vectorization, and construction of Lindblad supermatrices.
//
// Conventions used throughout the toolkit:
//   * The operator basis is the tensor-product Pauli-string basis
//     {F_k}, ordered identity-first and then lexicographically in
//     (I, X, Y, Z) per qubit with qubit 1 the most significant digit.
//     tr(F_j F_k) = 2^N delta_jk.
//   * Coherence vectors are isometric: v_k = tr(F_k rho) / sqrt(2^N),
//     so that |v|_2 equals the Hilbert-Schmidt norm of rho.
//   * Supermatrices act on coherence vectors; for a Hermiticity-preserving
//     generator expressed in a Hermitian basis they are real.
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aqo/errors.hpp"

namespace aqo {

using cx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Largest supported qubit count for dense D^2 x D^2 supermatrix storage.
inline constexpr int kMaxQubits = 6;

/// A Hermitian Pauli string in the symplectic representation
/// F = i^phase_k * X^xbits * Z^zbits, stored structurally (each string is a
/// generalized permutation matrix: one nonzero entry per row/column).
struct PauliString {
    std::uint32_t xbits = 0;
    std::uint32_t zbits = 0;
    int phase_k = 0; // power of i; canonical Hermitian strings have phase i^{#Y}
    int n_qubits = 0;

    int dim() const { return 1 << n_qubits; }

    /// Column index paired with row `col ^ xbits`; entry value at that spot.
    cx entry_for_column(int col) const;

    /// Dense D x D matrix form.
    Mat dense() const;

    /// tr(F * M) for dense M, in O(D) using the permutation structure.
    cx trace_with(const Mat& m) const;
};

/// Product of two strings (phases tracked mod 4).
PauliString string_product(const PauliString& a, const PauliString& b);

/// Orthogonal Hermitian operator basis with tr(F_j F_k) = norm_c * delta_jk.
struct OperatorBasis {
    int n_qubits = 0;
    int dim = 0;    // D = 2^n
    double norm_c = 0.0; // 2^n for Pauli strings
    std::vector<PauliString> strings; // size D^2

    int size() const { return static_cast<int>(strings.size()); }
    Mat element(int k) const { return strings[static_cast<std::size_t>(k)].dense(); }
};

/// Tensor-product Pauli-string basis for n qubits.
/// Throws InvalidArgument for n < 1 and CapacityError beyond the dense cap.
OperatorBasis pauli_basis(int n_qubits);

/// Isometric coherence vector of an operator: v_k = tr(F_k rho)/sqrt(norm_c).
Vec vectorize(const Mat& rho, const OperatorBasis& basis);

/// Exact inverse of vectorize: rho = sum_k v_k F_k / sqrt(norm_c).
Mat devectorize(const Vec& v, const OperatorBasis& basis);

/// Throws InvalidArgument unless H is Hermitian to tol_rel * max|H|.
void require_hermitian(const Mat& h, double tol_rel = 1e-12,
                       const char* what = "operator");

/// Validates density-matrix invariants (unit trace and Hermiticity to 1e-8,
/// eigenvalues >= -1e-7); throws InvalidArgument on violation.  Tolerances
/// admit states produced by the integrators, which are positive only up to
/// discretization error.
void require_density_matrix(const Mat& rho);

/// Supermatrix of an arbitrary linear operator action X -> action(X),
/// obtained by projecting onto the basis (column k is the coherence vector
/// of action(F_k), rescaled to act on coherence vectors).
Mat superop_from_action(const std::function<Mat(const Mat&)>& action,
                        const OperatorBasis& basis);

/// Supermatrix of the commutator generator X -> -i [H, X].
Mat hamiltonian_superop(const Mat& h, const OperatorBasis& basis);

/// Supermatrix of the dissipator
///   X -> 1/2 sum_i ([G_i, X G_i^dag] + [G_i X, G_i^dag])
///      = sum_i (G_i X G_i^dag - 1/2 {G_i^dag G_i, X}).
Mat dissipator_superop(const std::vector<Mat>& lindblad_ops,
                       const OperatorBasis& basis);

/// Full generator: hamiltonian_superop + dissipator_superop.
Mat lindblad_superop(const Mat& h, const std::vector<Mat>& lindblad_ops,
                     const OperatorBasis& basis);

/// Direct D x D evaluation of the generator on a state (test oracle for the
/// supermatrix path): -i[H, rho] + dissipator(rho).
Mat apply_lindblad_direct(const Mat& h, const std::vector<Mat>& lindblad_ops,
                          const Mat& rho);

/// A one-parameter family of generators s in [0,1] -> L(s), with an optional
/// analytic derivative map.  Evaluation must be a pure function of s.
struct GeneratorFamily {
    int dim = 0;      // Hilbert-space dimension D (supermatrix is D^2 x D^2)
    int n_qubits = 0;
    std::function<Mat(double)> L;
    std::function<Mat(double)> dL; // may be empty; see superop_derivative
    std::string name;
    std::map<std::string, double> params;
};

/// dL/ds at s: analytic when available, else a second-order finite
/// difference (central in the interior, one-sided at the endpoints).
Mat superop_derivative(const GeneratorFamily& fam, double s, double h = 1e-5);

/// Bilinear pairing <<e|d>> = sum_k e_k d_k (no conjugation).  Left Jordan
/// vectors pair with right ones bilinearly; this is not the Hermitian inner
/// product.
inline cx bilinear(const Vec& e, const Vec& d) {
    return (e.transpose() * d)(0, 0);
}

} // namespace aqo
