#pragma once

// Jordan-structure analysis of supermatrices: eigenvalue clustering, block
// detection via rank deficiencies, biorthonormal right/left vector chains,
// and continuity tracking of the whole frame along a one-parameter family.
//
// Conventions:
//  - Left/right pairing is bilinear (no conjugation): pairing(e, d) = e^T d.
//    Left vectors are rows of the inverse of the right-vector matrix, so
//    biorthonormality holds to inversion accuracy by construction.
//  - Right gauge: unit Euclidean norm for the chain head, phase chosen so the
//    largest-magnitude component is real positive; generalized vectors are
//    minimal-norm solutions of the chain equations.
//  - Blocks are ordered by (|Im gamma|, -Re gamma, Im gamma) ascending, which
//    places the trace block first for relaxing generators.

#include <string>
#include <vector>

#include "aqo/operator_algebra.hpp"

namespace aqo {

struct SpectralOptions {
    // Cluster radius for grouping raw eigenvalues; auto (<= 0) means
    // 1e-8 * max|L_ij|.
    double cluster_tol = -1.0;
    // Clusters closer than this (relative to max|L_ij|) are probed for a
    // genuine defect; roundoff splits a defective eigenvalue by O(sqrt(eps)),
    // far beyond the base cluster radius.
    double defect_merge_rel = 1e-6;
    // Singular values below rank_rel * max|M_ij| count as zero when inferring
    // kernel dimensions of (L - gamma I)^k.
    double rank_rel = 1e-6;
    // Minimum |<<E(s_k)|D(s_{k+1})>>| for accepting a label match while
    // tracking.
    double overlap_min = 0.5;
};

struct LJSpectrum {
    std::vector<cx> eigenvalues;        // one entry per Jordan block
    std::vector<int> block_dims;        // n_alpha
    std::vector<int> cluster_of_block;  // blocks sharing an id share a cluster
    bool diagonalizable = true;
    double matrix_norm = 0.0;      // max|L_ij|, the scale behind tolerances
    double cluster_tol_used = 0.0;

    int block_count() const { return static_cast<int>(eigenvalues.size()); }
    int total_dim() const {
        int n = 0;
        for (int d : block_dims) n += d;
        return n;
    }
};

struct JordanBlock {
    cx eigenvalue;
    int dim = 1;
    int cluster_id = 0;
    std::vector<Vec> right;  // chain D^(0) .. D^(dim-1)
    std::vector<Vec> left;   // bilinear duals E^(0) .. E^(dim-1)
};

struct JordanFrame {
    LJSpectrum spectrum;
    std::vector<JordanBlock> blocks;
    double conditioning = 1.0;    // max over chains of ||E|| * ||D||
    bool near_defective = false;  // conditioning above 1e8
    std::string gauge =
        "unit-norm chain heads, largest-component-positive phase, "
        "minimal-norm generalized vectors, bilinear left duals";
};

struct FrameResiduals {
    double right_chain = 0.0;
    double left_chain = 0.0;
    double biorthonormality = 0.0;
    double reconstruction = 0.0;  // ||P J P^{-1} - L||_max / ||L||_max
};

struct FrameFamily {
    std::vector<double> grid;
    std::vector<JordanFrame> frames;  // block labels consistent across grid
    double max_path_jump = 0.0;       // max |gamma(s_{k+1}) - gamma(s_k)|
    double min_overlap = 1.0;         // worst accepted matching overlap

    int block_count() const {
        return frames.empty() ? 0 : frames.front().spectrum.block_count();
    }
    // Eigenvalue path of one block across the grid.
    std::vector<cx> eigenvalue_path(int block) const;
};

// Eigenvalues of L grouped into Jordan blocks. Clustering uses cluster_tol
// (auto when <= 0); block dimensions come from kernel dimensions of powers of
// (L - gamma I) measured by singular-value rank gaps.
LJSpectrum spectrum(const Mat& L, double cluster_tol = -1.0);
LJSpectrum spectrum(const Mat& L, const SpectralOptions& opts);

// Right/left chain vectors for every block of a precomputed spectrum. The
// spectrum must describe L (verified; InvalidArgument otherwise).
JordanFrame biorthonormal_frame(const Mat& L, const LJSpectrum& spec);

// One-call spectrum + frame.
JordanFrame analyze(const Mat& L, double cluster_tol = -1.0);
JordanFrame analyze(const Mat& L, const SpectralOptions& opts);

// Frames of fam.L(s) at each grid point with block labels matched to the
// previous point by eigenvalue proximity, validated (and if needed replaced)
// by left/right overlaps, and gauge phases smoothed so consecutive right
// vectors have positive real overlap. Throws StructuralError when the block
// structure changes along the path (eigenvalue crossing).
FrameFamily track_frames(const GeneratorFamily& fam,
                         const std::vector<double>& grid,
                         const SpectralOptions& opts = {});

// Residuals of the chain relations, biorthonormality, and reconstruction.
FrameResiduals verify_jordan_relations(const Mat& L, const JordanFrame& frame);

// Lightweight continuity-matched eigenvalue paths (no frames, no rank
// analysis): paths[block][grid index]. Matching is greedy nearest-distance;
// sorting artifacts of degenerate spectra are avoided by construction.
std::vector<std::vector<cx>> track_eigenvalue_paths(
    const GeneratorFamily& fam, const std::vector<double>& grid);

// points uniformly spaced values covering [0, 1] inclusive (points >= 2).
std::vector<double> uniform_grid(int points);

}  // namespace aqo
