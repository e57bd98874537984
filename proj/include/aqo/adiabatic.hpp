#pragma once

// Open-system adiabaticity machinery: gap integrals, block-coupling tables,
// crossover times, the adiabatic-window detector, and block-decoupled
// (adiabatic) propagation.
//
// All quantities live on the s-grid of a tracked frame family with
// one-dimensional Jordan blocks.  For ordered block pairs (beta, alpha):
//
//   omega_{ba}(s) = gamma_b(s) - gamma_a(s)
//   Omega_{ba}(s) = int_0^s omega_{ba} ds'          (cumulative trapezoid)
//   V_{ba}(s)     = p_b(s) <<E_a(s)| dL/ds |D_b(s)>> / k_a
//   Q_{ba}(s)     = V_{ba}(s) / omega_{ba}(s)^2
//
// and the crossover time of block alpha at attempted total time T is
//
//   T_a^c = max_s | sum_{b != a} [ Q_{ba}(0) - Q_{ba}(s) e^{T Omega_{ba}(s)}
//                                  + int_0^s e^{T Omega_{ba}} (dQ_{ba}/ds') ds' ] |.
//
// Gauge: tracked frames carry unit-norm right vectors; the tables rescale
// block alpha by k_a = sqrt(2^N) / max-abs-component(D_a(0)), i.e. to the
// gauge in which the leading Pauli coefficient of each right operator is 1.
// The scale k_a is exposed as gauge_scale.  Pairs inside one equal-eigenvalue
// sector (same cluster) are excluded from the sums: they belong to a single
// degenerate sector, not to the inter-block coupling the crossover measures.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aqo/evolve.hpp"
#include "aqo/operator_algebra.hpp"
#include "aqo/spectral.hpp"

namespace aqo {

/// p_beta(s) expansion coefficients of the evolving state over the tracked
/// right frame, with the exponential prefactor e^{T Omega_beta} factored out.
struct TransportCoefficients {
    std::vector<double> grid;
    std::vector<std::vector<cx>> p;  ///< [block][grid index]
    double total_time = 0.0;         ///< T the coefficients refer to
    std::string mode;                ///< "decoupled" | "exact-projection" | "exact-conjugated"
    std::vector<char> overflow;      ///< per block: exponent range exceeded
    double reconstruction_residual0 = 0.0;  ///< | sum p(0) D(0) - rho0 | at s=0

    int block_count() const { return static_cast<int>(p.size()); }
};

/// T-independent pair tables (everything except the p_beta factor).
struct CouplingKernel {
    std::vector<double> grid;
    int m = 0;  ///< block count
    std::vector<cx> gamma0;          ///< eigenvalue of each block at s=0
    std::vector<int> cluster;        ///< equal-eigenvalue sector id per block
    std::vector<double> gauge_scale; ///< k_alpha (see header comment)
    std::vector<char> same_sector;   ///< [b*m+a] pair excluded from sums
    /// Pair tables indexed [grid point][b*m + a]:
    std::vector<std::vector<cx>> omega;  ///< gamma_b - gamma_a
    std::vector<std::vector<cx>> Omega;  ///< cumulative integral of omega
    std::vector<std::vector<cx>> M;      ///< <<E_a | dL/ds | D_b>> (unit gauge)
};

/// Full Eq.-style tables: kernel plus the p-dependent V, Q, dQ/ds.
struct CouplingTables {
    CouplingKernel kernel;
    double total_time = 0.0;            ///< T the embedded p refers to
    std::vector<std::vector<cx>> V;     ///< [grid point][b*m + a]
    std::vector<std::vector<cx>> Q;
    std::vector<std::vector<cx>> dQ;    ///< central differences on the grid

    int block_count() const { return kernel.m; }
    const std::vector<double>& grid() const { return kernel.grid; }
};

/// Report of crossover times over a grid of attempted run times.
struct CrossoverReport {
    std::vector<double> T_grid;
    int m = 0;
    double margin = 10.0;
    std::vector<std::vector<double>> Tc;  ///< [T index][block]; +inf = overflow
    std::vector<double> max_Tc;           ///< per T index
    std::vector<double> margin_achieved;  ///< T / max_Tc
    std::vector<char> in_window;          ///< T >= margin * max_Tc
    std::vector<std::pair<double, double>> window_intervals;  ///< [lo, hi] in T
    std::vector<char> divergent;          ///< per block: log-slope > 1 sustained
    std::vector<double> divergence_onset; ///< first T with 10x growth; NaN if none
};

/// Cumulative trapezoid of (gamma_b - gamma_a) over an arbitrary grid.
std::vector<cx> gap_integral(const std::vector<double>& grid,
                             const std::vector<cx>& gamma_b,
                             const std::vector<cx>& gamma_a);

/// All pair integrals Omega_{ba} on the family's grid, indexed [b*m + a].
std::vector<std::vector<cx>> gap_integrals(const FrameFamily& frames);

/// Decoupled transport law: p_b(0) = <<E_b(0)|rho0>>, evolved by
///   dp_b/ds = -p_b(s) <<E_b(s)| dD_b/ds >>
/// (the connection term; it vanishes for s-independent frames).
/// Throws StructuralError("unsupported-structure ...") on multi-dim blocks.
TransportCoefficients transport_coefficients(const FrameFamily& frames,
                                             const Mat& rho0, double T);

/// p extracted from an exactly propagated trajectory:
///   p_b(s) = <<E_b(s)|rho_exact(s)>> e^{-T Omega_b(s)}.
/// The trajectory must live on the frame grid.
TransportCoefficients transport_from_trajectory(const FrameFamily& frames,
                                                const Trajectory& traj);

/// Exact p for families obeying L(s) = e^{sK} L(0) e^{-sK} with a constant
/// generator K (unitary-interpolation models).  Solves the evolution in the
/// co-moving frame, v(s) = e^{sK} exp(s(T L(0) - K)) v(0), and projects each
/// eigencomponent separately so the e^{-T Omega_b} division never meets
/// catastrophically small magnitudes.  Blocks whose exponents exceed the
/// double range are flagged in `overflow` and their p set to 0 there.
TransportCoefficients transport_exact_conjugated(const FrameFamily& frames,
                                                 const Mat& rho0, double T,
                                                 const Mat& K);

/// T-independent part of the coupling tables (dL/ds sandwiches, gaps, gauge).
/// Throws StructuralError on multi-dim blocks or on a vanishing gap
/// |omega| <= 1e-10 between distinct-eigenvalue sectors (gap collapse).
CouplingKernel coupling_kernel(const FrameFamily& frames,
                               const GeneratorFamily& fam);

/// Binds transport coefficients to a kernel: V = p_b M / k_a, Q = V/omega^2,
/// dQ/ds by central differences (second-order one-sided at the ends).
CouplingTables bind_transport(const CouplingKernel& kernel,
                              const TransportCoefficients& p);

/// Convenience composition of coupling_kernel + bind_transport.
CouplingTables coupling_matrix(const FrameFamily& frames,
                               const GeneratorFamily& fam,
                               const TransportCoefficients& p);

/// Eq.-style crossover time of block `alpha` at attempted run time T
/// (see header comment).  Returns +inf when an exponent Re(T Omega) > 700
/// makes the sup diverge beyond double range.
double crossover_time(const CouplingTables& tables, int alpha, double T);

/// Crossover times for every block over a T grid, window verdicts, and
/// per-block divergence flags.  `tables_for_T` must return tables whose
/// embedded transport coefficients correspond to the given T.
CrossoverReport adiabaticity_window(
    const std::function<CouplingTables(double)>& tables_for_T,
    const std::vector<double>& T_grid, double margin = 10.0);

/// Block-decoupled (adiabatic) propagation:
///   |rho_a(s)>> = sum_b p_b(s) e^{T Omega_b(s)} |D_b(s)>>,
/// with p from the decoupled transport law.  Returns the trajectory on the
/// frame grid; method tag "adiabatic-decoupled".
Trajectory adiabatic_evolve(const FrameFamily& frames, const Mat& rho0, double T);

}  // namespace aqo
