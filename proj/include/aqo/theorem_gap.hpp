#pragma once

// Constant-spectrum diagnostics for unitary-interpolation schedules.
//
// For a schedule whose Hamiltonian part is conjugated by a unitary family
// u(s), the induced superoperator V(s) (acting as rho -> u(s)^dag rho u(s))
// is orthogonal on coherence vectors.  The sufficient condition for an
// s-independent generator spectrum is that the dissipative part obeys
// R(s) = V(s)^dag R(0) V(s); for constant R this reduces to [R, V(s)] = 0.
// The checks below evaluate those residuals and measure the actual
// eigenvalue drift along continuity-matched paths (never re-sorted, which
// would fabricate drift where paths merely change order).

#include <functional>
#include <string>
#include <vector>

#include "aqo/operator_algebra.hpp"

namespace aqo {

/// Superoperator family induced by a unitary family u(s).
struct ConjugationFamily {
    std::function<Mat(double)> V;  ///< s -> supermatrix of rho -> u^dag rho u
    int dim = 0;                   ///< supermatrix dimension (4^N)
    double unitarity_residual = 0.0;  ///< max probe residual of V V^dag - I
};

/// Builds the conjugation family, verifying u(s) is unitary to 1e-12 and
/// V(s) is orthogonal to 1e-11 at probe points, and that V(0) = I.
/// Throws InvalidArgument on a non-unitary input.
ConjugationFamily conjugation_superop(const std::function<Mat(double)>& u_family,
                                      const OperatorBasis& basis);

/// max over the grid of |R(s) - V(s)^dag R(0) V(s)| / |R(0)|  (entrywise max
/// norms).  Small residual certifies a constant generator spectrum.
double sufficient_condition_check(const std::function<Mat(double)>& R_of_s,
                                  const ConjugationFamily& V,
                                  const std::vector<double>& grid);

/// max over the grid of |R V(s) - V(s) R| / (|R| |V(s)|) for constant R.
double commutator_check(const Mat& R, const ConjugationFamily& V,
                        const std::vector<double>& grid);

/// Necessity direction: max over the grid of
/// |V(s) R(s) V(s)^dag - R(0)| / |R(0)| — for families with constant spectrum
/// and one-dimensional blocks this must be small.
double necessity_probe(const std::function<Mat(double)>& R_of_s,
                       const ConjugationFamily& V,
                       const std::vector<double>& grid);

/// Eigenvalue drift of L(s) along continuity-matched paths.
struct SpectralDriftReport {
    std::vector<double> grid;
    std::vector<std::vector<cx>> paths;  ///< [path][grid index], matched
    double max_drift = 0.0;              ///< max_k |path(s_k) - path(0)| over paths
    double threshold = 0.0;              ///< 1e-9 * max|L(0)|
    bool constant = false;               ///< max_drift < threshold
    bool all_one_dim = false;            ///< Jordan blocks at s=0 all 1-dim
    std::string block_structure;         ///< "all-one-dimensional" | "defective"
                                         ///< | "undetermined: <reason>"
};

/// Tracks every eigenvalue of L(s) over the grid and reports the drift
/// verdict plus whether the s=0 block structure makes the necessity
/// direction applicable (all blocks one-dimensional).
SpectralDriftReport constant_spectrum_check(const GeneratorFamily& fam,
                                            const std::vector<double>& grid);

}  // namespace aqo
