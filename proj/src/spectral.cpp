#include "aqo/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "aqo/errors.hpp"

namespace aqo {

namespace {

double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

std::string fmt_cx(cx z) {
    std::ostringstream os;
    os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

// ----- eigenvalue clustering ------------------------------------------------

struct RawCluster {
    cx mean{0.0, 0.0};
    std::vector<int> members;  // indices into the raw eigenvalue list
};

int uf_find(std::vector<int>& parent, int i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

std::vector<RawCluster> single_linkage(const Vec& vals, double tol) {
    const int n = static_cast<int>(vals.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(vals(i) - vals(j)) <= tol)
                parent[uf_find(parent, j)] = uf_find(parent, i);

    std::vector<RawCluster> clusters;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        const int root = uf_find(parent, i);
        if (slot[root] < 0) {
            slot[root] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[static_cast<std::size_t>(slot[root])].members.push_back(i);
    }
    for (RawCluster& c : clusters) {
        cx acc{0.0, 0.0};
        for (int idx : c.members) acc += vals(idx);
        c.mean = acc / static_cast<double>(c.members.size());
    }
    return clusters;
}

// Merge clusters of `base` that fall into a common group of `coarse`,
// selecting merged or separate per group via the supplied decision callback.
std::vector<RawCluster> merge_near_defective(
    const Vec& vals, std::vector<RawCluster> base, double coarse_tol,
    const std::function<bool(const RawCluster&)>& is_defective) {
    const int nb = static_cast<int>(base.size());
    // Group base clusters whose means are within coarse_tol (single linkage).
    std::vector<int> parent(nb);
    std::iota(parent.begin(), parent.end(), 0);
    for (int i = 0; i < nb; ++i)
        for (int j = i + 1; j < nb; ++j)
            if (std::abs(base[static_cast<std::size_t>(i)].mean -
                         base[static_cast<std::size_t>(j)].mean) <= coarse_tol)
                parent[uf_find(parent, j)] = uf_find(parent, i);

    std::vector<std::vector<int>> groups(static_cast<std::size_t>(nb));
    for (int i = 0; i < nb; ++i)
        groups[static_cast<std::size_t>(uf_find(parent, i))].push_back(i);

    std::vector<RawCluster> out;
    for (const auto& g : groups) {
        if (g.empty()) continue;
        if (g.size() == 1) {
            out.push_back(base[static_cast<std::size_t>(g.front())]);
            continue;
        }
        RawCluster merged;
        for (int bi : g)
            for (int idx : base[static_cast<std::size_t>(bi)].members)
                merged.members.push_back(idx);
        cx acc{0.0, 0.0};
        for (int idx : merged.members) acc += vals(idx);
        merged.mean = acc / static_cast<double>(merged.members.size());
        if (is_defective(merged)) {
            out.push_back(std::move(merged));
        } else {
            // Close but jointly semisimple: the eigenvalues are genuinely
            // resolvable, keep the fine clusters.
            for (int bi : g) out.push_back(base[static_cast<std::size_t>(bi)]);
        }
    }
    return out;
}

// ----- rank analysis ---------------------------------------------------------

struct KernelInfo {
    int dim = 0;
    Mat basis;  // orthonormal columns spanning the numerical kernel
};

KernelInfo kernel_of_abs(const Mat& M, double tol, const char* context) {
    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const int n = static_cast<int>(sv.size());
    int k = 0;
    while (k < n && sv(n - 1 - k) < tol) ++k;
    // Ambiguity guard: demand a clear gap between "zero" and "nonzero"
    // singular values; Jordan structure must not be guessed from noise.
    if (k > 0 && k < n) {
        const double below = sv(n - k);           // largest value treated as zero
        const double smallest_kept = sv(n - k - 1);
        if (below > 0.1 * smallest_kept)
            throw NumericalError(std::string("ambiguous rank gap while ") + context +
                                 " (singular values " + std::to_string(below) + " vs " +
                                 std::to_string(smallest_kept) + ")");
    }
    KernelInfo info;
    info.dim = k;
    info.basis = svd.matrixV().rightCols(k);
    return info;
}

KernelInfo kernel_of(const Mat& M, double rank_rel, const char* context) {
    Eigen::JacobiSVD<Mat> svd(M);
    const double scale =
        (svd.singularValues().size() > 0 && svd.singularValues()(0) > 0.0)
            ? svd.singularValues()(0)
            : 1.0;
    return kernel_of_abs(M, rank_rel * scale, context);
}

// Kernel dimensions of (L - gamma I)^k for k = 1..p with d_p = multiplicity,
// plus the kernel bases (needed for chain construction).
struct WeyrData {
    std::vector<KernelInfo> kernels;  // index k-1 holds ker M^k
    std::vector<int> block_dims;      // dims of all Jordan blocks, descending
};

WeyrData weyr_structure(const Mat& L, cx gamma, int multiplicity, double rank_rel) {
    const Mat M = L - gamma * Mat::Identity(L.rows(), L.cols());
    WeyrData wd;
    Mat Mk = M;
    int d_prev = 0;
    // Rank decisions for M^k are anchored to ||M||^k: once the filtration
    // exhausts a nilpotent part, M^k is numerically zero and its own largest
    // singular value is roundoff noise, so a power-relative threshold would
    // misread the kernel.
    const double m_scale = std::max(M.norm(), 1e-300);
    double power_scale = 1.0;
    for (int k = 1; k <= multiplicity; ++k) {
        power_scale *= m_scale;
        KernelInfo ki = kernel_of_abs(Mk, rank_rel * power_scale,
                                      "inferring Jordan block dimensions");
        if (ki.dim < d_prev || ki.dim > multiplicity)
            throw NumericalError("inconsistent kernel filtration near eigenvalue " +
                                 fmt_cx(gamma));
        if (ki.dim == d_prev)
            throw NumericalError("stagnant kernel filtration near eigenvalue " +
                                 fmt_cx(gamma) + "; block structure is ambiguous");
        wd.kernels.push_back(std::move(ki));
        d_prev = wd.kernels.back().dim;
        if (d_prev >= multiplicity) break;
        Mk = Mk * M;
    }
    if (d_prev != multiplicity)
        throw NumericalError("kernel filtration does not exhaust the cluster at " +
                             fmt_cx(gamma));
    const int p = static_cast<int>(wd.kernels.size());
    // w_k = number of blocks with dimension >= k.
    std::vector<int> w(static_cast<std::size_t>(p) + 2, 0);
    for (int k = 1; k <= p; ++k)
        w[static_cast<std::size_t>(k)] =
            wd.kernels[static_cast<std::size_t>(k - 1)].dim -
            (k >= 2 ? wd.kernels[static_cast<std::size_t>(k - 2)].dim : 0);
    for (int k = p; k >= 1; --k) {
        const int exactly_k = w[static_cast<std::size_t>(k)] -
                              w[static_cast<std::size_t>(k) + 1];
        if (exactly_k < 0)
            throw NumericalError("non-monotone Weyr characteristic near eigenvalue " +
                                 fmt_cx(gamma));
        for (int c = 0; c < exactly_k; ++c) wd.block_dims.push_back(k);
    }
    std::sort(wd.block_dims.begin(), wd.block_dims.end(), std::greater<int>());
    int total = 0;
    for (int d : wd.block_dims) total += d;
    if (total != multiplicity)
        throw NumericalError("Weyr characteristic does not sum to the multiplicity at " +
                             fmt_cx(gamma));
    return wd;
}

// ----- gauge -----------------------------------------------------------------

// Scale v to unit norm with the largest-magnitude component real positive.
// Returns the applied complex factor (v_new = factor * v_old).
cx gauge_fix(Vec& v) {
    const double nrm = v.norm();
    if (nrm == 0.0) throw NumericalError("cannot gauge-fix a zero vector");
    int imax = 0;
    double best = 0.0;
    for (int i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best) {
            best = a;
            imax = i;
        }
    }
    const cx z = v(imax);
    const cx factor = std::conj(z) / (std::abs(z) * nrm);
    v *= factor;
    return factor;
}

// Orthonormal columns spanning the component of `cand` orthogonal to
// span(blockers); columns whose residual is below drop_tol are discarded.
Mat independent_directions(const Mat& cand, const Mat& blockers, double drop_tol) {
    Mat work = cand;
    if (blockers.cols() > 0) {
        Eigen::HouseholderQR<Mat> qr(blockers);
        Mat q = qr.householderQ() * Mat::Identity(blockers.rows(), blockers.cols());
        work -= q * (q.adjoint() * work);
    }
    // Rank-revealing pass over the residual columns.
    Mat kept(work.rows(), work.cols());
    int n_kept = 0;
    for (int c = 0; c < work.cols(); ++c) {
        Vec v = work.col(c);
        for (int k = 0; k < n_kept; ++k) v -= kept.col(k).dot(v) * kept.col(k);
        const double nrm = v.norm();
        if (nrm > drop_tol) kept.col(n_kept++) = v / nrm;
    }
    return kept.leftCols(n_kept);
}

struct PendingBlock {
    cx eigenvalue;
    int cluster_id = 0;
    std::vector<Vec> right;  // chain, head first
};

// Jordan chains for one defective cluster via the kernel filtration.
std::vector<std::vector<Vec>> build_chains(const Mat& L, cx gamma,
                                           const WeyrData& wd) {
    const Mat M = L - gamma * Mat::Identity(L.rows(), L.cols());
    const int p = static_cast<int>(wd.kernels.size());
    std::vector<std::vector<Vec>> chains;
    for (int k = p; k >= 1; --k) {
        // Blockers at level k: ker M^{k-1} plus the level-k members of chains
        // already started above.
        std::vector<Vec> blocker_list;
        if (k >= 2) {
            const Mat& lower = wd.kernels[static_cast<std::size_t>(k - 2)].basis;
            for (int c = 0; c < lower.cols(); ++c) blocker_list.push_back(lower.col(c));
        }
        for (const auto& ch : chains)
            if (static_cast<int>(ch.size()) >= k)
                blocker_list.push_back(ch[static_cast<std::size_t>(k - 1)]);
        Mat blockers(L.rows(), static_cast<int>(blocker_list.size()));
        for (int c = 0; c < blockers.cols(); ++c)
            blockers.col(c) = blocker_list[static_cast<std::size_t>(c)];

        const Mat& level = wd.kernels[static_cast<std::size_t>(k - 1)].basis;
        const Mat starters = independent_directions(level, blockers, 1e-7);
        for (int c = 0; c < starters.cols(); ++c) {
            // Chain stored head-first: D^(0), ..., D^(k-1) with M D^(j) = D^(j-1).
            std::vector<Vec> chain(static_cast<std::size_t>(k));
            chain[static_cast<std::size_t>(k - 1)] = starters.col(c);
            for (int j = k - 2; j >= 0; --j)
                chain[static_cast<std::size_t>(j)] =
                    M * chain[static_cast<std::size_t>(j + 1)];
            if (chain.front().norm() < 1e-12)
                throw NumericalError("degenerate Jordan chain near eigenvalue " +
                                     fmt_cx(gamma));
            // Gauge: unit-norm positive-phase head; the chain equations then fix
            // every other member's scale.
            Vec head = chain.front();
            const cx factor = gauge_fix(head);
            for (auto& vec : chain) vec *= factor;
            chains.push_back(std::move(chain));
        }
    }
    return chains;
}

int compare_block_keys(cx a, cx b, double quantum) {
    const auto snap = [quantum](double x) {
        return std::llround(x / quantum);
    };
    const long long a1 = snap(std::abs(a.imag())), b1 = snap(std::abs(b.imag()));
    if (a1 != b1) return a1 < b1 ? -1 : 1;
    const long long a2 = snap(-a.real()), b2 = snap(-b.real());
    if (a2 != b2) return a2 < b2 ? -1 : 1;
    const long long a3 = snap(a.imag()), b3 = snap(b.imag());
    if (a3 != b3) return a3 < b3 ? -1 : 1;
    return 0;
}

JordanFrame analyze_impl(const Mat& L, const SpectralOptions& opts, bool build_left) {
    if (L.rows() != L.cols()) throw InvalidArgument("supermatrix must be square");
    if (!L.allFinite()) throw InvalidArgument("supermatrix contains non-finite entries");
    const int n = static_cast<int>(L.rows());
    const double norm = max_abs(L);

    Eigen::ComplexEigenSolver<Mat> ces(L, true);
    if (ces.info() != Eigen::Success)
        throw NumericalError("eigendecomposition failed to converge (dimension " +
                             std::to_string(n) + ", max entry " + std::to_string(norm) + ")");
    const Vec vals = ces.eigenvalues();

    const double tol = opts.cluster_tol > 0.0 ? opts.cluster_tol
                                              : 1e-8 * std::max(norm, 1e-300);
    std::vector<RawCluster> clusters = single_linkage(vals, tol);

    // Roundoff splits a defective eigenvalue much wider than the base cluster
    // radius; probe near-coincident clusters and merge only when the joint
    // kernel analysis confirms a genuine defect.
    const double coarse = std::max(tol, opts.defect_merge_rel * norm);
    if (coarse > tol) {
        clusters = merge_near_defective(
            vals, std::move(clusters), coarse, [&](const RawCluster& c) {
                if (c.members.size() < 2) return false;
                const Mat M = L - c.mean * Mat::Identity(n, n);
                KernelInfo ki = kernel_of(M, opts.rank_rel, "probing a near-defect");
                return ki.dim < static_cast<int>(c.members.size());
            });
    }

    // Build blocks per cluster.
    std::vector<PendingBlock> pending;
    int cluster_id = 0;
    for (const RawCluster& c : clusters) {
        const int m = static_cast<int>(c.members.size());
        if (m == 1) {
            PendingBlock b;
            b.eigenvalue = c.mean;
            b.cluster_id = cluster_id;
            Vec v = ces.eigenvectors().col(c.members.front());
            gauge_fix(v);
            b.right.push_back(std::move(v));
            pending.push_back(std::move(b));
        } else {
            WeyrData wd = weyr_structure(L, c.mean, m, opts.rank_rel);
            const bool semisimple =
                wd.block_dims.empty() ? true : (wd.block_dims.front() == 1);
            if (semisimple) {
                const Mat& basis = wd.kernels.front().basis;
                for (int col = 0; col < basis.cols(); ++col) {
                    PendingBlock b;
                    b.eigenvalue = c.mean;
                    b.cluster_id = cluster_id;
                    Vec v = basis.col(col);
                    gauge_fix(v);
                    b.right.push_back(std::move(v));
                    pending.push_back(std::move(b));
                }
            } else {
                for (auto& chain : build_chains(L, c.mean, wd)) {
                    PendingBlock b;
                    b.eigenvalue = c.mean;
                    b.cluster_id = cluster_id;
                    b.right = std::move(chain);
                    pending.push_back(std::move(b));
                }
            }
        }
        ++cluster_id;
    }

    // Deterministic block order: (|Im|, -Re, Im) ascending with keys snapped
    // to a small quantum so roundoff cannot reorder ties.
    const double quantum = std::max(1e-12 * std::max(norm, 1.0), 1e-300);
    std::stable_sort(pending.begin(), pending.end(),
                     [&](const PendingBlock& a, const PendingBlock& b) {
                         return compare_block_keys(a.eigenvalue, b.eigenvalue, quantum) < 0;
                     });

    JordanFrame frame;
    frame.spectrum.matrix_norm = norm;
    frame.spectrum.cluster_tol_used = tol;
    std::vector<int> cluster_renumber(static_cast<std::size_t>(cluster_id), -1);
    int next_cluster = 0;
    for (PendingBlock& b : pending) {
        int& slot = cluster_renumber[static_cast<std::size_t>(b.cluster_id)];
        if (slot < 0) slot = next_cluster++;
        JordanBlock jb;
        jb.eigenvalue = b.eigenvalue;
        jb.dim = static_cast<int>(b.right.size());
        jb.cluster_id = slot;
        jb.right = std::move(b.right);
        frame.spectrum.eigenvalues.push_back(jb.eigenvalue);
        frame.spectrum.block_dims.push_back(jb.dim);
        frame.spectrum.cluster_of_block.push_back(slot);
        if (jb.dim > 1) frame.spectrum.diagonalizable = false;
        frame.blocks.push_back(std::move(jb));
    }
    if (frame.spectrum.total_dim() != n)
        throw NumericalError("Jordan block dimensions do not sum to the matrix size");

    if (build_left) {
        Mat P(n, n);
        int col = 0;
        for (const JordanBlock& b : frame.blocks)
            for (const Vec& d : b.right) P.col(col++) = d;
        Eigen::PartialPivLU<Mat> lu(P);
        const double rcond = lu.rcond();
        if (!(rcond > 1e-14))
            throw NumericalError("right-vector matrix is numerically singular "
                                 "(reciprocal condition " + std::to_string(rcond) + ")");
        const Mat Pinv = lu.inverse();
        int row = 0;
        double conditioning = 0.0;
        for (JordanBlock& b : frame.blocks) {
            for (int j = 0; j < b.dim; ++j) {
                Vec e = Pinv.row(row++).transpose();  // bilinear dual, no conjugation
                conditioning = std::max(
                    conditioning,
                    e.norm() * b.right[static_cast<std::size_t>(j)].norm());
                b.left.push_back(std::move(e));
            }
        }
        frame.conditioning = conditioning;
        frame.near_defective = conditioning > 1e8;
    }
    return frame;
}

}  // namespace

std::vector<cx> FrameFamily::eigenvalue_path(int block) const {
    std::vector<cx> path;
    path.reserve(frames.size());
    for (const JordanFrame& f : frames)
        path.push_back(f.blocks[static_cast<std::size_t>(block)].eigenvalue);
    return path;
}

LJSpectrum spectrum(const Mat& L, double cluster_tol) {
    SpectralOptions opts;
    opts.cluster_tol = cluster_tol;
    return spectrum(L, opts);
}

LJSpectrum spectrum(const Mat& L, const SpectralOptions& opts) {
    return analyze_impl(L, opts, /*build_left=*/false).spectrum;
}

JordanFrame analyze(const Mat& L, double cluster_tol) {
    SpectralOptions opts;
    opts.cluster_tol = cluster_tol;
    return analyze(L, opts);
}

JordanFrame analyze(const Mat& L, const SpectralOptions& opts) {
    return analyze_impl(L, opts, /*build_left=*/true);
}

JordanFrame biorthonormal_frame(const Mat& L, const LJSpectrum& spec) {
    SpectralOptions opts;
    opts.cluster_tol = spec.cluster_tol_used;
    JordanFrame frame = analyze(L, opts);
    const LJSpectrum& got = frame.spectrum;
    if (got.block_count() != spec.block_count())
        throw InvalidArgument("supplied spectrum does not match the matrix "
                              "(block count differs)");
    const double tol = 10.0 * std::max(spec.cluster_tol_used, got.cluster_tol_used);
    for (int b = 0; b < got.block_count(); ++b) {
        const auto bi = static_cast<std::size_t>(b);
        if (got.block_dims[bi] != spec.block_dims[bi] ||
            std::abs(got.eigenvalues[bi] - spec.eigenvalues[bi]) > tol)
            throw InvalidArgument("supplied spectrum does not match the matrix "
                                  "(block " + std::to_string(b) + " differs)");
    }
    return frame;
}

FrameResiduals verify_jordan_relations(const Mat& L, const JordanFrame& frame) {
    FrameResiduals r;
    const int n = static_cast<int>(L.rows());
    Mat rec = Mat::Zero(n, n);
    std::vector<const JordanBlock*> blocks;
    for (const JordanBlock& b : frame.blocks) blocks.push_back(&b);

    for (const JordanBlock* bp : blocks) {
        const JordanBlock& b = *bp;
        for (int j = 0; j < b.dim; ++j) {
            const auto ji = static_cast<std::size_t>(j);
            Vec rhs = b.eigenvalue * b.right[ji];
            if (j > 0) rhs += b.right[ji - 1];
            r.right_chain = std::max(r.right_chain, (L * b.right[ji] - rhs).norm());
            if (!b.left.empty()) {
                Vec lhs = b.eigenvalue * b.left[ji];
                if (j + 1 < b.dim) lhs += b.left[ji + 1];
                r.left_chain =
                    std::max(r.left_chain, (L.transpose() * b.left[ji] - lhs).norm());
                rec += b.eigenvalue * b.right[ji] * b.left[ji].transpose();
                if (j > 0) rec += b.right[ji - 1] * b.left[ji].transpose();
            }
        }
    }

    // Biorthonormality across every pair of chains.
    for (std::size_t a = 0; a < blocks.size(); ++a) {
        if (blocks[a]->left.empty()) continue;
        for (std::size_t bidx = 0; bidx < blocks.size(); ++bidx) {
            for (int i = 0; i < blocks[a]->dim; ++i)
                for (int j = 0; j < blocks[bidx]->dim; ++j) {
                    const cx val = bilinear(blocks[a]->left[static_cast<std::size_t>(i)],
                                            blocks[bidx]->right[static_cast<std::size_t>(j)]);
                    const double target = (a == bidx && i == j) ? 1.0 : 0.0;
                    r.biorthonormality =
                        std::max(r.biorthonormality, std::abs(val - target));
                }
        }
    }

    const double scale = std::max(max_abs(L), 1e-300);
    r.reconstruction = max_abs(rec - L) / scale;
    return r;
}

FrameFamily track_frames(const GeneratorFamily& fam,
                         const std::vector<double>& grid,
                         const SpectralOptions& opts) {
    if (grid.size() < 2) throw InvalidArgument("tracking grid needs at least 2 points");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] < 0.0 || grid[k] > 1.0)
            throw InvalidArgument("tracking grid must lie in [0, 1]");
        if (k > 0 && grid[k] <= grid[k - 1])
            throw InvalidArgument("tracking grid must be strictly increasing");
    }

    FrameFamily fam_out;
    fam_out.grid = grid;
    fam_out.frames.reserve(grid.size());
    fam_out.frames.push_back(analyze(fam.L(grid.front()), opts));

    for (std::size_t k = 1; k < grid.size(); ++k) {
        const JordanFrame& prev = fam_out.frames.back();
        JordanFrame cur = analyze(fam.L(grid[k]), opts);
        const int m = prev.spectrum.block_count();
        if (cur.spectrum.block_count() != m) {
            std::ostringstream os;
            os << "block structure changes between s = " << grid[k - 1] << " and s = "
               << grid[k] << " (" << m << " -> " << cur.spectrum.block_count()
               << " blocks): eigenvalue paths cross or merge";
            throw StructuralError(os.str());
        }

        // Greedy nearest-eigenvalue assignment with matching dimensions.
        std::vector<int> match(static_cast<std::size_t>(m), -1);  // prev -> cur
        {
            struct Cand { double cost; int i, j; };
            std::vector<Cand> cands;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    if (prev.blocks[static_cast<std::size_t>(i)].dim ==
                        cur.blocks[static_cast<std::size_t>(j)].dim)
                        cands.push_back({std::abs(prev.blocks[static_cast<std::size_t>(i)].eigenvalue -
                                                  cur.blocks[static_cast<std::size_t>(j)].eigenvalue),
                                         i, j});
            std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                if (a.cost != b.cost) return a.cost < b.cost;
                if (a.i != b.i) return a.i < b.i;
                return a.j < b.j;
            });
            std::vector<bool> used_i(static_cast<std::size_t>(m), false),
                used_j(static_cast<std::size_t>(m), false);
            for (const Cand& c : cands) {
                if (used_i[static_cast<std::size_t>(c.i)] ||
                    used_j[static_cast<std::size_t>(c.j)])
                    continue;
                match[static_cast<std::size_t>(c.i)] = c.j;
                used_i[static_cast<std::size_t>(c.i)] = true;
                used_j[static_cast<std::size_t>(c.j)] = true;
            }
        }
        for (int i = 0; i < m; ++i)
            if (match[static_cast<std::size_t>(i)] < 0) {
                std::ostringstream os;
                os << "cannot match Jordan blocks between s = " << grid[k - 1]
                   << " and s = " << grid[k] << " (dimension pattern changed)";
                throw StructuralError(os.str());
            }

        // Validate with left/right overlaps; on failure retry the assignment
        // greedily by overlap before declaring a crossing.
        auto overlap_of = [&](int i, int j) {
            return std::abs(bilinear(prev.blocks[static_cast<std::size_t>(i)].left.front(),
                                     cur.blocks[static_cast<std::size_t>(j)].right.front()));
        };
        auto same_cluster_prev = [&](int i, int j) {
            return prev.blocks[static_cast<std::size_t>(i)].cluster_id ==
                   prev.blocks[static_cast<std::size_t>(j)].cluster_id;
        };
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            // Degenerate clusters are validated jointly after alignment below.
            bool degenerate = false;
            for (int i2 = 0; i2 < m; ++i2)
                if (i2 != i && same_cluster_prev(i, i2)) degenerate = true;
            if (!degenerate && overlap_of(i, match[static_cast<std::size_t>(i)]) < opts.overlap_min)
                ok = false;
        }
        if (!ok) {
            struct Cand { double gain; int i, j; };
            std::vector<Cand> cands;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    if (prev.blocks[static_cast<std::size_t>(i)].dim ==
                        cur.blocks[static_cast<std::size_t>(j)].dim)
                        cands.push_back({overlap_of(i, j), i, j});
            std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
                if (a.gain != b.gain) return a.gain > b.gain;
                if (a.i != b.i) return a.i < b.i;
                return a.j < b.j;
            });
            std::fill(match.begin(), match.end(), -1);
            std::vector<bool> used_j(static_cast<std::size_t>(m), false);
            for (const Cand& c : cands) {
                if (match[static_cast<std::size_t>(c.i)] >= 0 ||
                    used_j[static_cast<std::size_t>(c.j)])
                    continue;
                match[static_cast<std::size_t>(c.i)] = c.j;
                used_j[static_cast<std::size_t>(c.j)] = true;
            }
            for (int i = 0; i < m; ++i) {
                const int j = match[static_cast<std::size_t>(i)];
                bool degenerate = false;
                for (int i2 = 0; i2 < m; ++i2)
                    if (i2 != i && same_cluster_prev(i, i2)) degenerate = true;
                if (j < 0 || (!degenerate && overlap_of(i, j) < opts.overlap_min)) {
                    std::ostringstream os;
                    os << "frame labels cannot be continued across s = " << grid[k - 1]
                       << " .. " << grid[k] << " (all overlaps below " << opts.overlap_min
                       << "); eigenvalue paths likely cross";
                    throw StructuralError(os.str());
                }
            }
        }

        // Distinctness must be preserved along the path: two previously
        // distinct eigenvalue sectors collapsing into one cluster (or one
        // sector splitting apart) means the paths cross in this interval.
        for (int i = 0; i < m; ++i)
            for (int i2 = i + 1; i2 < m; ++i2) {
                const bool was = same_cluster_prev(i, i2);
                const bool now =
                    cur.blocks[static_cast<std::size_t>(match[static_cast<std::size_t>(i)])].cluster_id ==
                    cur.blocks[static_cast<std::size_t>(match[static_cast<std::size_t>(i2)])].cluster_id;
                if (was != now) {
                    std::ostringstream os;
                    os << "eigenvalue paths of blocks " << i << " and " << i2
                       << (now ? " merge" : " separate") << " between s = "
                       << grid[k - 1] << " and s = " << grid[k]
                       << ": crossing breaks frame tracking";
                    throw StructuralError(os.str());
                }
            }

        // Reorder the new frame into the previous labeling.
        JordanFrame ordered;
        ordered.spectrum.matrix_norm = cur.spectrum.matrix_norm;
        ordered.spectrum.cluster_tol_used = cur.spectrum.cluster_tol_used;
        ordered.spectrum.diagonalizable = cur.spectrum.diagonalizable;
        ordered.conditioning = cur.conditioning;
        ordered.near_defective = cur.near_defective;
        ordered.gauge = cur.gauge;
        for (int i = 0; i < m; ++i) {
            const auto j = static_cast<std::size_t>(match[static_cast<std::size_t>(i)]);
            ordered.blocks.push_back(std::move(cur.blocks[j]));
            JordanBlock& nb = ordered.blocks.back();
            nb.cluster_id = prev.blocks[static_cast<std::size_t>(i)].cluster_id;
            ordered.spectrum.eigenvalues.push_back(nb.eigenvalue);
            ordered.spectrum.block_dims.push_back(nb.dim);
            ordered.spectrum.cluster_of_block.push_back(nb.cluster_id);
            fam_out.max_path_jump = std::max(
                fam_out.max_path_jump,
                std::abs(nb.eigenvalue -
                         prev.blocks[static_cast<std::size_t>(i)].eigenvalue));
        }

        // Subspace alignment inside degenerate semisimple clusters: rotate the
        // new vectors by the unitary closest to the inverse overlap so each
        // label continues its predecessor.
        std::vector<bool> handled(static_cast<std::size_t>(m), false);
        for (int i = 0; i < m; ++i) {
            if (handled[static_cast<std::size_t>(i)]) continue;
            std::vector<int> members;
            for (int i2 = i; i2 < m; ++i2)
                if (prev.blocks[static_cast<std::size_t>(i2)].cluster_id ==
                    prev.blocks[static_cast<std::size_t>(i)].cluster_id)
                    members.push_back(i2);
            for (int mem : members) handled[static_cast<std::size_t>(mem)] = true;
            const int mc = static_cast<int>(members.size());
            const bool all_one_dim = [&] {
                for (int mem : members)
                    if (ordered.blocks[static_cast<std::size_t>(mem)].dim != 1) return false;
                return true;
            }();
            if (mc > 1 && all_one_dim) {
                Mat O(mc, mc);
                for (int a = 0; a < mc; ++a)
                    for (int bcol = 0; bcol < mc; ++bcol)
                        O(a, bcol) = bilinear(
                            prev.blocks[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])].left.front(),
                            ordered.blocks[static_cast<std::size_t>(members[static_cast<std::size_t>(bcol)])].right.front());
                Eigen::JacobiSVD<Mat> svd(O, Eigen::ComputeFullU | Eigen::ComputeFullV);
                if (svd.singularValues().minCoeff() < opts.overlap_min) {
                    std::ostringstream os;
                    os << "degenerate cluster cannot be continued across s = "
                       << grid[k - 1] << " .. " << grid[k]
                       << " (subspace overlap too small)";
                    throw StructuralError(os.str());
                }
                const Mat W = svd.matrixV() * svd.matrixU().adjoint();
                const Mat Winv = W.adjoint();
                std::vector<Vec> new_right(static_cast<std::size_t>(mc)),
                    new_left(static_cast<std::size_t>(mc));
                for (int a = 0; a < mc; ++a) {
                    Vec vr = Vec::Zero(ordered.blocks.front().right.front().size());
                    Vec vl = vr;
                    for (int bcol = 0; bcol < mc; ++bcol) {
                        vr += ordered.blocks[static_cast<std::size_t>(members[static_cast<std::size_t>(bcol)])]
                                  .right.front() * W(bcol, a);
                        vl += ordered.blocks[static_cast<std::size_t>(members[static_cast<std::size_t>(bcol)])]
                                  .left.front() * Winv(a, bcol);
                    }
                    new_right[static_cast<std::size_t>(a)] = std::move(vr);
                    new_left[static_cast<std::size_t>(a)] = std::move(vl);
                }
                for (int a = 0; a < mc; ++a) {
                    auto& blk = ordered.blocks[static_cast<std::size_t>(members[static_cast<std::size_t>(a)])];
                    blk.right.front() = std::move(new_right[static_cast<std::size_t>(a)]);
                    blk.left.front() = std::move(new_left[static_cast<std::size_t>(a)]);
                }
            }
        }

        // Phase smoothing: make the Hermitian overlap of consecutive chain
        // heads real positive; the inverse phase keeps the left duals paired.
        for (int i = 0; i < m; ++i) {
            const auto ii = static_cast<std::size_t>(i);
            const cx z = prev.blocks[ii].right.front().dot(ordered.blocks[ii].right.front());
            const double az = std::abs(z);
            fam_out.min_overlap = std::min(fam_out.min_overlap, az);
            if (az < 1e-12) continue;
            const cx phase = std::conj(z) / az;
            for (Vec& v : ordered.blocks[ii].right) v *= phase;
            for (Vec& v : ordered.blocks[ii].left) v /= phase;
        }

        fam_out.frames.push_back(std::move(ordered));
    }
    return fam_out;
}

std::vector<std::vector<cx>> track_eigenvalue_paths(
    const GeneratorFamily& fam, const std::vector<double>& grid) {
    if (grid.size() < 2) throw InvalidArgument("tracking grid needs at least 2 points");
    Mat L0 = fam.L(grid.front());
    if (!L0.allFinite()) throw InvalidArgument("generator is non-finite at the grid start");
    const int n = static_cast<int>(L0.rows());
    Eigen::ComplexEigenSolver<Mat> ces(L0, false);
    if (ces.info() != Eigen::Success)
        throw NumericalError("eigendecomposition failed at the grid start");
    std::vector<cx> current(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) current[static_cast<std::size_t>(i)] = ces.eigenvalues()(i);
    const double quantum = std::max(1e-12 * std::max(max_abs(L0), 1.0), 1e-300);
    std::stable_sort(current.begin(), current.end(), [&](cx a, cx b) {
        return compare_block_keys(a, b, quantum) < 0;
    });

    std::vector<std::vector<cx>> paths(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        paths[static_cast<std::size_t>(i)].reserve(grid.size());
        paths[static_cast<std::size_t>(i)].push_back(current[static_cast<std::size_t>(i)]);
    }

    for (std::size_t k = 1; k < grid.size(); ++k) {
        Eigen::ComplexEigenSolver<Mat> step(fam.L(grid[k]), false);
        if (step.info() != Eigen::Success)
            throw NumericalError("eigendecomposition failed at s = " +
                                 std::to_string(grid[k]));
        const Vec vals = step.eigenvalues();
        struct Cand { double cost; int i, j; };
        std::vector<Cand> cands;
        cands.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                cands.push_back({std::abs(current[static_cast<std::size_t>(i)] - vals(j)), i, j});
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            if (a.i != b.i) return a.i < b.i;
            return a.j < b.j;
        });
        std::vector<bool> used_i(static_cast<std::size_t>(n), false),
            used_j(static_cast<std::size_t>(n), false);
        int assigned = 0;
        for (const Cand& c : cands) {
            if (used_i[static_cast<std::size_t>(c.i)] || used_j[static_cast<std::size_t>(c.j)])
                continue;
            used_i[static_cast<std::size_t>(c.i)] = true;
            used_j[static_cast<std::size_t>(c.j)] = true;
            current[static_cast<std::size_t>(c.i)] = vals(c.j);
            paths[static_cast<std::size_t>(c.i)].push_back(vals(c.j));
            if (++assigned == n) break;
        }
    }
    return paths;
}

std::vector<double> uniform_grid(int points) {
    if (points < 2) throw InvalidArgument("grid needs at least 2 points");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int k = 0; k < points; ++k)
        g[static_cast<std::size_t>(k)] = static_cast<double>(k) / (points - 1);
    g.front() = 0.0;
    g.back() = 1.0;
    return g;
}

}  // namespace aqo
