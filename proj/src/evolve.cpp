#include "aqo/evolve.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>

#include "aqo/errors.hpp"

namespace aqo {

namespace {

// The supermatrix of a Hermiticity-preserving generator is real in the
// Hermitian operator basis; exponentiating the real part when the imaginary
// part is negligible halves the work and keeps the propagated vector real.
Mat step_exponential(const Mat& scaled_generator) {
    const double scale = scaled_generator.cwiseAbs().maxCoeff();
    const double imag_mag = scaled_generator.imag().cwiseAbs().maxCoeff();
    if (imag_mag <= 1e-13 * std::max(scale, 1.0)) {
        const Eigen::MatrixXd real_exp = scaled_generator.real().exp().eval();
        return real_exp.cast<cx>();
    }
    return scaled_generator.exp();
}

}  // namespace

Mat Trajectory::state_matrix(int k, const OperatorBasis& basis) const {
    if (k < 0 || k >= static_cast<int>(states.size()))
        throw InvalidArgument("trajectory index out of range");
    return devectorize(states[static_cast<std::size_t>(k)], basis);
}

Trajectory exact_evolve(const GeneratorFamily& fam, const Mat& rho0, double T,
                        int steps) {
    if (!(T > 0.0)) throw InvalidArgument("total time T must be positive");
    if (steps < 100) throw InvalidArgument("integrator needs at least 100 steps");
    require_density_matrix(rho0);

    const OperatorBasis basis = pauli_basis(fam.n_qubits);
    if (rho0.rows() != basis.strings.front().dim())
        throw InvalidArgument("initial state dimension does not match the model");

    Trajectory traj;
    traj.total_time = T;
    traj.steps = steps;
    traj.grid.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);

    Vec v = vectorize(rho0, basis);
    traj.grid.push_back(0.0);
    traj.states.push_back(v);
    const double dt = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const double s_mid = (k + 0.5) * dt;
        const Mat L = fam.L(s_mid);
        if (!L.allFinite())
            throw NumericalError("generator is non-finite at s = " + std::to_string(s_mid));
        const Mat E = step_exponential((T * dt) * L);
        v = E * v;
        if (!v.allFinite())
            throw NumericalError("state became non-finite at step " + std::to_string(k + 1));
        traj.grid.push_back(k + 1 == steps ? 1.0 : (k + 1) * dt);
        traj.states.push_back(v);
    }
    return traj;
}

double projector_probability(const Mat& rho, bool plus, int qubit) {
    require_density_matrix(rho);
    const int dim = static_cast<int>(rho.rows());
    int n = 0;
    while ((1 << n) < dim) ++n;
    if ((1 << n) != dim) throw InvalidArgument("state dimension is not a power of 2");
    if (qubit < 0 || qubit >= n) throw InvalidArgument("qubit index out of range");

    // P = (I +- sigma_x on `qubit`)/2; tr(P rho) = (1 +- tr(sigma_x_q rho))/2.
    // sigma_x on the qubit flips that bit, so tr(sigma_x_q rho) picks up the
    // matrix elements between bit-flipped basis states.
    const int bit = 1 << (n - 1 - qubit);
    cx x_expect{0.0, 0.0};
    for (int c = 0; c < dim; ++c) x_expect += rho(c ^ bit, c);
    double p = 0.5 * (1.0 + (plus ? 1.0 : -1.0) * x_expect.real());

    const double clamped = std::min(1.0, std::max(0.0, p));
    if (std::abs(clamped - p) > 1e-10)
        std::cerr << "projector_probability: clamped " << p << " to " << clamped
                  << "\n";
    return clamped;
}

StateDistance compare_states(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidArgument("states have different dimensions");
    const Mat d = a - b;
    StateDistance out;
    out.hilbert_schmidt = d.norm();
    const Mat h = 0.5 * (d + d.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    out.trace = 0.5 * es.eigenvalues().cwiseAbs().sum();
    return out;
}

MeasurementReport measure_plus_minus(const Mat& rho, int qubit,
                                     const Mat* reference) {
    MeasurementReport rep;
    rep.p_plus = projector_probability(rho, true, qubit);
    rep.p_minus = projector_probability(rho, false, qubit);
    rep.purity = (rho * rho).trace().real();
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()),
                                          Eigen::EigenvaluesOnly);
    rep.min_eigenvalue = es.eigenvalues().minCoeff();
    if (reference != nullptr)
        rep.trace_distance_to_reference = compare_states(rho, *reference).trace;
    return rep;
}

double trajectory_min_eigenvalue(const Trajectory& traj, const OperatorBasis& basis) {
    double min_eig = 0.0;
    bool first = true;
    for (const Vec& v : traj.states) {
        const Mat rho = devectorize(v, basis);
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho + rho.adjoint()),
                                              Eigen::EigenvaluesOnly);
        const double m = es.eigenvalues().minCoeff();
        if (first || m < min_eig) min_eig = m;
        first = false;
    }
    return min_eig;
}

}  // namespace aqo
