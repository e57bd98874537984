#pragma once

// Exact time evolution of the master equation and physical observables used
// to compare exact against adiabatically decoupled dynamics.
//
// The integrator propagates coherence vectors with piecewise-constant
// generator exponentials evaluated at interval midpoints,
//   |rho(s_{k+1})>> = exp(T dt L(s_mid)) |rho(s_k)>>,
// which preserves the trace exactly for trace-preserving generators and is
// globally second order in the step size.

#include <limits>
#include <string>
#include <vector>

#include "aqo/operator_algebra.hpp"

namespace aqo {

/// A time-evolved state history on a schedule grid s in [0, 1].
struct Trajectory {
    std::vector<double> grid;   ///< s values, ascending, grid.front()=0, back()=1
    std::vector<Vec> states;    ///< coherence vector at each grid point
    double total_time = 0.0;    ///< physical duration T in units of 1/omega
    std::string method = "midpoint-exponential";
    int steps = 0;              ///< number of integrator steps taken

    /// Density matrix at grid index k.
    Mat state_matrix(int k, const OperatorBasis& basis) const;
};

/// Outcome summary of the {|+>, |->} measurement on one qubit.
struct MeasurementReport {
    double p_plus = 0.0;
    double p_minus = 0.0;
    double purity = 0.0;          ///< tr(rho^2)
    double min_eigenvalue = 0.0;  ///< smallest eigenvalue of rho
    /// Trace distance to the reference state; NaN when no reference given.
    double trace_distance_to_reference = std::numeric_limits<double>::quiet_NaN();
};

/// Trace distance and Hilbert-Schmidt (Frobenius) distance between states.
struct StateDistance {
    double trace = 0.0;
    double hilbert_schmidt = 0.0;
};

/// Integrates d|rho>>/ds = T L(s) |rho>> from s=0 to s=1 starting at rho0.
///
/// Requires T > 0 and steps >= 100.  Throws NumericalError if the state
/// becomes non-finite, InvalidArgument for an invalid initial state.
Trajectory exact_evolve(const GeneratorFamily& fam, const Mat& rho0, double T,
                        int steps = 2000);

/// tr(P rho) for P = (I +- sigma_x on `qubit`)/2, clamped to [0, 1].
/// Clamping beyond 1e-10 is logged to stderr.  Qubit 0 is the most
/// significant tensor factor, matching the operator-basis ordering.
double projector_probability(const Mat& rho, bool plus, int qubit = 0);

/// Trace distance 1/2 ||a - b||_1 and Hilbert-Schmidt distance ||a - b||_F.
StateDistance compare_states(const Mat& a, const Mat& b);

/// Full {|+>, |->} measurement summary on one qubit; optional reference
/// state for the trace-distance field.
MeasurementReport measure_plus_minus(const Mat& rho, int qubit = 0,
                                     const Mat* reference = nullptr);

/// Smallest eigenvalue of the Hermitian part over all trajectory states
/// (positivity diagnostic).
double trajectory_min_eigenvalue(const Trajectory& traj, const OperatorBasis& basis);

}  // namespace aqo
