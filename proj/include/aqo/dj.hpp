#pragma once

// Built-in model family: adiabatic Deutsch-Jozsa with independent dephasing.
//
// The schedule conjugates the initial Hamiltonian by the unitary
// interpolation Utilde(s) = cos(pi s/2) I + i sin(pi s/2) U, where
// U = diag((-1)^{f(x)}) encodes the queried function, so the spectral gaps
// of H(s) are constant in s.  Dephasing acts through the constant operators
// Gamma_i = lambda_i sqrt(omega) sigma_z^i.
//
// Qubit/bit conventions: qubit 0 is the most significant tensor factor; a
// balanced function's hex bit table is MSB-first, i.e. the bit for input x
// is (table >> (2^N - 1 - x)) & 1.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aqo/operator_algebra.hpp"

namespace aqo {

/// Function class queried by the algorithm.
struct FSpec {
    enum class Kind { Constant0, Constant1, Balanced };
    Kind kind = Kind::Constant0;
    std::uint64_t table = 0;  ///< MSB-first bit table, used when balanced
    int n_qubits = 1;

    int operator()(int x) const;   ///< f(x) in {0, 1}
    bool constant() const { return kind != Kind::Balanced; }
    std::string to_string() const; ///< round-trips through parse_f_spec
};

/// Parses "constant0" | "constant1" | "balanced:<hex bit table>".
/// A balanced table must contain exactly 2^(N-1) ones.
FSpec parse_f_spec(const std::string& text, int n_qubits);

/// One problem instance.
struct DJInstance {
    int n_qubits = 1;
    FSpec f;
    double omega = 1.0;            ///< energy scale; time unit is 1/omega
    std::vector<double> lambdas;   ///< per-qubit dephasing strengths, >= 0

    double lambda(int qubit) const { return lambdas[static_cast<std::size_t>(qubit)]; }
};

/// Validates and assembles an instance; a single lambda is broadcast to all
/// qubits.  Throws InvalidArgument on out-of-range parameters.
DJInstance make_dj_instance(int n_qubits, const std::string& f_spec,
                            const std::vector<double>& lambdas, double omega = 1.0);

/// U = diag((-1)^{f(x)}); satisfies U^2 = I.
Mat dj_oracle_unitary(const DJInstance& inst);

/// Utilde(s) = cos(pi s/2) I + i sin(pi s/2) U = exp(i pi s U / 2).
Mat dj_interpolation_unitary(const DJInstance& inst, double s);

/// H(0) = omega sum_i (I - sigma_x^i)/2; ground state |+>^N, gap omega.
Mat dj_hamiltonian0(const DJInstance& inst);

/// H(s) = Utilde(s) H(0) Utilde(s)^dag.
Mat dj_hamiltonian(const DJInstance& inst, double s);

/// dH/ds = (i pi / 2) [U, H(s)]  (Hermitian for all s).
Mat dj_hamiltonian_derivative(const DJInstance& inst, double s);

/// Dephasing operators Gamma_i = lambda_i sqrt(omega) sigma_z^i.
std::vector<Mat> dj_lindblad_ops(const DJInstance& inst);

/// Full generator family L(s) with analytic dL/ds; feeds every pipeline.
GeneratorFamily dj_generator_family(const DJInstance& inst);

/// F = (-1)^{f(0)} - (-1)^{f(1)} for one qubit: 0 when constant, +-2 balanced.
int dj_F(const FSpec& f);

/// Closed-form 4x4 supermatrix of the one-qubit model in the basis
/// (I, sigma_x, sigma_y, sigma_z)/sqrt(2):
///   omega * [[0,0,0,0], [0,-2l^2,0,q], [0,0,-2l^2,-r], [0,-q,r,0]]
/// with r(s) = -cos(pi F s / 2), q(s) = sin(pi F s / 2).
Mat dj_superop_analytic(double s, double lambda, int F, double omega = 1.0);

/// Closed-form final state of the decoupled (adiabatic) dynamics, one qubit:
///   rho(1) = [I + e^{-2 lambda^2 T} (-1)^{f(0)+f(1)} sigma_x] / 2.
/// Requires 0 <= lambda < 1 (distinct generator eigenvalues).
Mat dj_final_state_analytic(double T, double lambda, const FSpec& f);

/// Closed-form measurement probabilities for the state above.
struct DJSuccess {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double success = 0.0;  ///< p_plus for constant f, p_minus for balanced
};
DJSuccess dj_success_probability(double T, double lambda, const FSpec& f);

/// T* solving success(T*) = target:  T* = -ln(2 target - 1) / (2 lambda^2).
/// Requires lambda > 0 and 0.5 < target < 1.
double dj_optimal_runtime(double lambda, double target);

/// Final-time ground state |g> = U |+>^N as a column vector.
Vec dj_ground_state(const DJInstance& inst);

/// <g| rho |g>, clamped to [0, 1]: the algorithm's success probability for
/// any N (reduces to p_plus / p_minus at N = 1).
double dj_ground_state_overlap(const Mat& rho, const DJInstance& inst);

/// s -> Utilde(s), for conjugation-family diagnostics.
std::function<Mat(double)> dj_unitary_family(const DJInstance& inst);

/// Majority-vote success probability over `runs` independent repetitions
/// (runs odd) when a single run succeeds with probability p.
double repeated_success(double p, int runs);

}  // namespace aqo
