#include "aqo/adiabatic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aqo/errors.hpp"

namespace aqo {

namespace {

constexpr double kExpRange = 700.0;  // |Re exponent| beyond which exp overflows

void require_one_dim(const FrameFamily& frames, const char* op) {
    for (const JordanFrame& f : frames.frames)
        for (const JordanBlock& b : f.blocks)
            if (b.dim > 1)
                throw StructuralError(std::string("unsupported-structure: ") + op +
                                      " requires one-dimensional Jordan blocks "
                                      "(found a block of dimension " +
                                      std::to_string(b.dim) + ")");
}

int n_qubits_from_dim(int superop_dim) {
    int n = 0;
    int d = 1;
    while (d < superop_dim) {
        d *= 4;
        ++n;
    }
    if (d != superop_dim)
        throw InvalidArgument("supermatrix dimension is not a power of 4");
    return n;
}

std::vector<cx> cumtrapz(const std::vector<double>& grid, const std::vector<cx>& f) {
    std::vector<cx> out(grid.size(), cx{0.0, 0.0});
    for (std::size_t k = 1; k < grid.size(); ++k)
        out[k] = out[k - 1] + 0.5 * (grid[k] - grid[k - 1]) * (f[k] + f[k - 1]);
    return out;
}

// Central differences with second-order one-sided stencils at the ends
// (uniform grid assumed, as produced by uniform_grid).
std::vector<cx> grid_derivative(const std::vector<double>& grid,
                                const std::vector<cx>& f) {
    const std::size_t n = grid.size();
    std::vector<cx> out(n);
    if (n < 3) {
        const double h = grid.back() - grid.front();
        const cx d = (f.back() - f.front()) / h;
        std::fill(out.begin(), out.end(), d);
        return out;
    }
    const double h = grid[1] - grid[0];
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    for (std::size_t k = 1; k + 1 < n; ++k)
        out[k] = (f[k + 1] - f[k - 1]) / (grid[k + 1] - grid[k - 1]);
    out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    return out;
}

std::vector<std::vector<cx>> eigenvalue_paths(const FrameFamily& frames) {
    const int m = frames.block_count();
    std::vector<std::vector<cx>> gamma(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        gamma[static_cast<std::size_t>(b)] = frames.eigenvalue_path(b);
    return gamma;
}

}  // namespace

std::vector<cx> gap_integral(const std::vector<double>& grid,
                             const std::vector<cx>& gamma_b,
                             const std::vector<cx>& gamma_a) {
    if (grid.size() != gamma_b.size() || grid.size() != gamma_a.size())
        throw InvalidArgument("gap integral needs equal-length grid and paths");
    std::vector<cx> omega(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) omega[k] = gamma_b[k] - gamma_a[k];
    return cumtrapz(grid, omega);
}

std::vector<std::vector<cx>> gap_integrals(const FrameFamily& frames) {
    const int m = frames.block_count();
    const auto gamma = eigenvalue_paths(frames);
    std::vector<std::vector<cx>> Omega(static_cast<std::size_t>(m) *
                                       static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        for (int a = 0; a < m; ++a)
            Omega[static_cast<std::size_t>(b * m + a)] =
                gap_integral(frames.grid, gamma[static_cast<std::size_t>(b)],
                             gamma[static_cast<std::size_t>(a)]);
    return Omega;
}

TransportCoefficients transport_coefficients(const FrameFamily& frames,
                                             const Mat& rho0, double T) {
    require_one_dim(frames, "decoupled transport");
    require_density_matrix(rho0);
    const int m = frames.block_count();
    const std::size_t npts = frames.grid.size();
    const int sdim = static_cast<int>(frames.frames.front().blocks.front().right.front().size());
    const OperatorBasis basis = pauli_basis(n_qubits_from_dim(sdim));
    if (rho0.rows() != basis.strings.front().dim())
        throw InvalidArgument("initial state dimension does not match the frames");
    const Vec v0 = vectorize(rho0, basis);

    TransportCoefficients out;
    out.grid = frames.grid;
    out.total_time = T;
    out.mode = "decoupled";
    out.p.assign(static_cast<std::size_t>(m), std::vector<cx>(npts));
    out.overflow.assign(static_cast<std::size_t>(m), 0);

    Vec reconstruct = Vec::Zero(sdim);
    for (int b = 0; b < m; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        // Connection term <<E_b | dD_b/ds >> on the grid.
        std::vector<Vec> rights(npts);
        for (std::size_t k = 0; k < npts; ++k)
            rights[k] = frames.frames[k].blocks[bi].right.front();
        std::vector<cx> conn(npts);
        for (std::size_t k = 0; k < npts; ++k) {
            Vec dD;
            if (k == 0) {
                const double h = frames.grid[1] - frames.grid[0];
                dD = (-3.0 * rights[0] + 4.0 * rights[1] - rights[2]) / (2.0 * h);
            } else if (k + 1 == npts) {
                const double h = frames.grid[npts - 1] - frames.grid[npts - 2];
                dD = (3.0 * rights[npts - 1] - 4.0 * rights[npts - 2] +
                      rights[npts - 3]) /
                     (2.0 * h);
            } else {
                dD = (rights[k + 1] - rights[k - 1]) /
                     (frames.grid[k + 1] - frames.grid[k - 1]);
            }
            conn[k] = bilinear(frames.frames[k].blocks[bi].left.front(), dD);
        }
        const std::vector<cx> C = cumtrapz(frames.grid, conn);
        const cx p0 = bilinear(frames.frames.front().blocks[bi].left.front(), v0);
        reconstruct += p0 * rights.front();
        for (std::size_t k = 0; k < npts; ++k) {
            if (std::abs(C[k].real()) > kExpRange) {
                out.overflow[bi] = 1;
                out.p[bi][k] = cx{0.0, 0.0};
            } else {
                out.p[bi][k] = p0 * std::exp(-C[k]);
            }
        }
    }
    out.reconstruction_residual0 = (reconstruct - v0).norm();
    return out;
}

TransportCoefficients transport_from_trajectory(const FrameFamily& frames,
                                                const Trajectory& traj) {
    require_one_dim(frames, "trajectory projection");
    if (traj.grid.size() != frames.grid.size())
        throw InvalidArgument("trajectory and frames live on different grids");
    for (std::size_t k = 0; k < traj.grid.size(); ++k)
        if (std::abs(traj.grid[k] - frames.grid[k]) > 1e-12)
            throw InvalidArgument("trajectory and frames live on different grids");

    const int m = frames.block_count();
    const std::size_t npts = frames.grid.size();
    const double T = traj.total_time;
    const auto gamma = eigenvalue_paths(frames);

    TransportCoefficients out;
    out.grid = frames.grid;
    out.total_time = T;
    out.mode = "exact-projection";
    out.p.assign(static_cast<std::size_t>(m), std::vector<cx>(npts));
    out.overflow.assign(static_cast<std::size_t>(m), 0);

    Vec reconstruct = Vec::Zero(traj.states.front().size());
    for (int b = 0; b < m; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        const std::vector<cx> Omega =
            cumtrapz(frames.grid, gamma[bi]);
        const cx p0 = bilinear(frames.frames.front().blocks[bi].left.front(),
                               traj.states.front());
        reconstruct += p0 * frames.frames.front().blocks[bi].right.front();
        for (std::size_t k = 0; k < npts; ++k) {
            const cx expo = -T * Omega[k];
            if (std::abs(expo.real()) > kExpRange) {
                out.overflow[bi] = 1;
                out.p[bi][k] = cx{0.0, 0.0};
                continue;
            }
            const cx proj = bilinear(frames.frames[k].blocks[bi].left.front(),
                                     traj.states[k]);
            out.p[bi][k] = proj * std::exp(expo);
        }
    }
    out.reconstruction_residual0 = (reconstruct - traj.states.front()).norm();
    return out;
}

TransportCoefficients transport_exact_conjugated(const FrameFamily& frames,
                                                 const Mat& rho0, double T,
                                                 const Mat& K) {
    require_one_dim(frames, "exact conjugated transport");
    require_density_matrix(rho0);
    const int m = frames.block_count();
    const std::size_t npts = frames.grid.size();
    const int sdim = static_cast<int>(frames.frames.front().blocks.front().right.front().size());
    if (K.rows() != sdim || K.cols() != sdim)
        throw InvalidArgument("frame generator K has the wrong dimension");
    const OperatorBasis basis = pauli_basis(n_qubits_from_dim(sdim));
    if (rho0.rows() != basis.strings.front().dim())
        throw InvalidArgument("initial state dimension does not match the frames");
    const Vec v0 = vectorize(rho0, basis);

    // L(0) reconstructed from the frame (exact to frame accuracy): the
    // co-moving generator is A = T L(0) - K.
    Mat L0 = Mat::Zero(sdim, sdim);
    for (int b = 0; b < m; ++b) {
        const JordanBlock& blk = frames.frames.front().blocks[static_cast<std::size_t>(b)];
        L0 += blk.eigenvalue * blk.right.front() * blk.left.front().transpose();
    }
    const Mat A = T * L0 - K;

    Eigen::ComplexEigenSolver<Mat> esA(A, true);
    if (esA.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the co-moving generator failed");
    const Vec a = esA.eigenvalues();
    const Mat R = esA.eigenvectors();
    Eigen::PartialPivLU<Mat> luR(R);
    if (!(luR.rcond() > 1e-13))
        throw NumericalError("co-moving generator is too ill-conditioned for the "
                             "eigencomponent expansion");
    const Vec c = luR.solve(v0);

    Eigen::ComplexEigenSolver<Mat> esK(K, true);
    if (esK.info() != Eigen::Success)
        throw NumericalError("eigendecomposition of the frame generator failed");
    const Vec kappa = esK.eigenvalues();
    const Mat RK = esK.eigenvectors();
    Eigen::PartialPivLU<Mat> luK(RK);
    if (!(luK.rcond() > 1e-13))
        throw NumericalError("frame generator is defective; conjugated transport "
                             "needs a diagonalizable K");
    const Mat RKinvR = luK.solve(R);  // RK^{-1} R, reused at every s

    const auto gamma = eigenvalue_paths(frames);
    std::vector<std::vector<cx>> Omega(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        Omega[static_cast<std::size_t>(b)] =
            cumtrapz(frames.grid, gamma[static_cast<std::size_t>(b)]);

    TransportCoefficients out;
    out.grid = frames.grid;
    out.total_time = T;
    out.mode = "exact-conjugated";
    out.p.assign(static_cast<std::size_t>(m), std::vector<cx>(npts));
    out.overflow.assign(static_cast<std::size_t>(m), 0);

    for (std::size_t k = 0; k < npts; ++k) {
        const double s = frames.grid[k];
        // Y(s) = V(s) R = RK diag(e^{s kappa}) RK^{-1} R.
        Mat Y = RKinvR;
        for (int r = 0; r < sdim; ++r) Y.row(r) *= std::exp(s * kappa(r));
        Y = RK * Y;
        for (int b = 0; b < m; ++b) {
            const auto bi = static_cast<std::size_t>(b);
            if (out.overflow[bi]) {
                out.p[bi][k] = cx{0.0, 0.0};
                continue;
            }
            const Vec& e = frames.frames[k].blocks[bi].left.front();
            const Eigen::RowVectorXcd overlaps = e.transpose() * Y;
            cx acc{0.0, 0.0};
            bool blown = false;
            for (int mu = 0; mu < sdim; ++mu) {
                const cx weight = overlaps(mu) * c(mu);
                const cx expo = s * a(mu) - T * Omega[bi][k];
                if (expo.real() > kExpRange) {
                    if (std::abs(weight) > 1e-280) {
                        blown = true;
                        break;
                    }
                    continue;  // exactly-suppressed component, exponent irrelevant
                }
                acc += weight * std::exp(expo);
            }
            if (blown) {
                out.overflow[bi] = 1;
                out.p[bi][k] = cx{0.0, 0.0};
            } else {
                out.p[bi][k] = acc;
            }
        }
    }

    Vec reconstruct = Vec::Zero(sdim);
    for (int b = 0; b < m; ++b)
        reconstruct += out.p[static_cast<std::size_t>(b)].front() *
                       frames.frames.front().blocks[static_cast<std::size_t>(b)].right.front();
    out.reconstruction_residual0 = (reconstruct - v0).norm();
    return out;
}

CouplingKernel coupling_kernel(const FrameFamily& frames,
                               const GeneratorFamily& fam) {
    require_one_dim(frames, "coupling tables");
    const int m = frames.block_count();
    const std::size_t npts = frames.grid.size();
    const int sdim = static_cast<int>(frames.frames.front().blocks.front().right.front().size());
    if (fam.dim != sdim)
        throw InvalidArgument("generator family dimension does not match the frames");

    CouplingKernel kern;
    kern.grid = frames.grid;
    kern.m = m;
    for (int b = 0; b < m; ++b) {
        const JordanBlock& blk = frames.frames.front().blocks[static_cast<std::size_t>(b)];
        kern.gamma0.push_back(blk.eigenvalue);
        kern.cluster.push_back(blk.cluster_id);
        // Gauge in which the leading Pauli coefficient of the right operator
        // is 1: rescale by sqrt(2^N) / max |component|.
        const double max_comp = blk.right.front().cwiseAbs().maxCoeff();
        kern.gauge_scale.push_back(std::sqrt(std::sqrt(static_cast<double>(sdim))) /
                                   max_comp);
    }
    kern.same_sector.assign(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0);
    for (int b = 0; b < m; ++b)
        for (int aidx = 0; aidx < m; ++aidx)
            if (kern.cluster[static_cast<std::size_t>(b)] ==
                kern.cluster[static_cast<std::size_t>(aidx)])
                kern.same_sector[static_cast<std::size_t>(b * m + aidx)] = 1;

    const auto gamma = eigenvalue_paths(frames);
    kern.omega.assign(npts, std::vector<cx>(static_cast<std::size_t>(m) *
                                            static_cast<std::size_t>(m)));
    for (std::size_t k = 0; k < npts; ++k)
        for (int b = 0; b < m; ++b)
            for (int aidx = 0; aidx < m; ++aidx)
                kern.omega[k][static_cast<std::size_t>(b * m + aidx)] =
                    gamma[static_cast<std::size_t>(b)][k] -
                    gamma[static_cast<std::size_t>(aidx)][k];

    // Gap collapse between distinct eigenvalue sectors invalidates Q = V/omega^2.
    for (std::size_t k = 0; k < npts; ++k)
        for (int b = 0; b < m; ++b)
            for (int aidx = 0; aidx < m; ++aidx) {
                const auto idx = static_cast<std::size_t>(b * m + aidx);
                if (kern.same_sector[idx]) continue;
                if (std::abs(kern.omega[k][idx]) <= 1e-10) {
                    std::ostringstream os;
                    os << "gap collapse: |omega| <= 1e-10 between blocks " << b
                       << " and " << aidx << " at s = " << frames.grid[k];
                    throw StructuralError(os.str());
                }
            }

    kern.Omega.assign(npts, std::vector<cx>(static_cast<std::size_t>(m) *
                                            static_cast<std::size_t>(m)));
    for (int b = 0; b < m; ++b)
        for (int aidx = 0; aidx < m; ++aidx) {
            std::vector<cx> w(npts);
            for (std::size_t k = 0; k < npts; ++k)
                w[k] = kern.omega[k][static_cast<std::size_t>(b * m + aidx)];
            const std::vector<cx> I = cumtrapz(frames.grid, w);
            for (std::size_t k = 0; k < npts; ++k)
                kern.Omega[k][static_cast<std::size_t>(b * m + aidx)] = I[k];
        }

    kern.M.assign(npts, std::vector<cx>(static_cast<std::size_t>(m) *
                                        static_cast<std::size_t>(m)));
    for (std::size_t k = 0; k < npts; ++k) {
        const Mat dL = superop_derivative(fam, frames.grid[k]);
        std::vector<Vec> dLD(static_cast<std::size_t>(m));
        for (int b = 0; b < m; ++b)
            dLD[static_cast<std::size_t>(b)] =
                dL * frames.frames[k].blocks[static_cast<std::size_t>(b)].right.front();
        for (int aidx = 0; aidx < m; ++aidx) {
            const Vec& e = frames.frames[k].blocks[static_cast<std::size_t>(aidx)].left.front();
            for (int b = 0; b < m; ++b)
                kern.M[k][static_cast<std::size_t>(b * m + aidx)] =
                    bilinear(e, dLD[static_cast<std::size_t>(b)]);
        }
    }
    return kern;
}

CouplingTables bind_transport(const CouplingKernel& kernel,
                              const TransportCoefficients& p) {
    if (p.grid.size() != kernel.grid.size())
        throw InvalidArgument("transport coefficients and kernel grids differ");
    if (p.block_count() != kernel.m)
        throw InvalidArgument("transport coefficients and kernel block counts differ");
    const int m = kernel.m;
    const std::size_t npts = kernel.grid.size();

    CouplingTables t;
    t.kernel = kernel;
    t.total_time = p.total_time;
    t.V.assign(npts, std::vector<cx>(static_cast<std::size_t>(m) *
                                     static_cast<std::size_t>(m)));
    t.Q = t.V;
    for (std::size_t k = 0; k < npts; ++k)
        for (int b = 0; b < m; ++b)
            for (int aidx = 0; aidx < m; ++aidx) {
                const auto idx = static_cast<std::size_t>(b * m + aidx);
                if (b == aidx || kernel.same_sector[idx]) continue;
                const cx V = p.p[static_cast<std::size_t>(b)][k] * kernel.M[k][idx] /
                             kernel.gauge_scale[static_cast<std::size_t>(aidx)];
                t.V[k][idx] = V;
                const cx w = kernel.omega[k][idx];
                t.Q[k][idx] = V / (w * w);
            }

    t.dQ.assign(npts, std::vector<cx>(static_cast<std::size_t>(m) *
                                      static_cast<std::size_t>(m)));
    for (int b = 0; b < m; ++b)
        for (int aidx = 0; aidx < m; ++aidx) {
            const auto idx = static_cast<std::size_t>(b * m + aidx);
            std::vector<cx> q(npts);
            for (std::size_t k = 0; k < npts; ++k) q[k] = t.Q[k][idx];
            const std::vector<cx> dq = grid_derivative(kernel.grid, q);
            for (std::size_t k = 0; k < npts; ++k) t.dQ[k][idx] = dq[k];
        }
    return t;
}

CouplingTables coupling_matrix(const FrameFamily& frames,
                               const GeneratorFamily& fam,
                               const TransportCoefficients& p) {
    return bind_transport(coupling_kernel(frames, fam), p);
}

double crossover_time(const CouplingTables& tables, int alpha, double T) {
    const int m = tables.block_count();
    if (alpha < 0 || alpha >= m) throw InvalidArgument("block index out of range");
    if (!(T > 0.0)) throw InvalidArgument("attempted run time T must be positive");
    const std::vector<double>& grid = tables.grid();
    const std::size_t npts = grid.size();

    // Pairs with identically vanishing Q contribute nothing regardless of the
    // exponential factor; skip them so dL/ds = 0 models never overflow.
    std::vector<char> active(static_cast<std::size_t>(m), 0);
    for (int b = 0; b < m; ++b) {
        if (b == alpha) continue;
        const auto idx = static_cast<std::size_t>(b * m + alpha);
        if (tables.kernel.same_sector[idx]) continue;
        double mag = 0.0;
        for (std::size_t k = 0; k < npts; ++k)
            mag = std::max(mag, std::max(std::abs(tables.Q[k][idx]),
                                         std::abs(tables.dQ[k][idx])));
        if (mag > 1e-300) active[static_cast<std::size_t>(b)] = 1;
    }

    double sup = 0.0;
    std::vector<cx> integral(static_cast<std::size_t>(m), cx{0.0, 0.0});
    std::vector<cx> prev_f(static_cast<std::size_t>(m), cx{0.0, 0.0});
    for (std::size_t k = 0; k < npts; ++k) {
        cx sum{0.0, 0.0};
        for (int b = 0; b < m; ++b) {
            if (!active[static_cast<std::size_t>(b)]) continue;
            const auto idx = static_cast<std::size_t>(b * m + alpha);
            const cx expo = T * tables.kernel.Omega[k][idx];
            if (expo.real() > kExpRange)
                return std::numeric_limits<double>::infinity();
            const cx ef = std::exp(expo);
            const cx f = ef * tables.dQ[k][idx];
            if (k > 0)
                integral[static_cast<std::size_t>(b)] +=
                    0.5 * (grid[k] - grid[k - 1]) *
                    (prev_f[static_cast<std::size_t>(b)] + f);
            prev_f[static_cast<std::size_t>(b)] = f;
            sum += tables.Q[0][idx] - tables.Q[k][idx] * ef +
                   integral[static_cast<std::size_t>(b)];
        }
        sup = std::max(sup, std::abs(sum));
    }
    return sup;
}

CrossoverReport adiabaticity_window(
    const std::function<CouplingTables(double)>& tables_for_T,
    const std::vector<double>& T_grid, double margin) {
    if (T_grid.empty()) throw InvalidArgument("T grid is empty");
    for (std::size_t t = 0; t < T_grid.size(); ++t) {
        if (!(T_grid[t] > 0.0)) throw InvalidArgument("T grid must be positive");
        if (t > 0 && T_grid[t] <= T_grid[t - 1])
            throw InvalidArgument("T grid must be strictly increasing");
    }
    if (!(margin > 0.0)) throw InvalidArgument("window margin must be positive");

    constexpr double inf = std::numeric_limits<double>::infinity();
    CrossoverReport rep;
    rep.T_grid = T_grid;
    rep.margin = margin;

    for (double T : T_grid) {
        const CouplingTables tables = tables_for_T(T);
        if (rep.m == 0) rep.m = tables.block_count();
        std::vector<double> row(static_cast<std::size_t>(rep.m));
        for (int a = 0; a < rep.m; ++a)
            row[static_cast<std::size_t>(a)] = crossover_time(tables, a, T);
        const double mx = *std::max_element(row.begin(), row.end());
        rep.Tc.push_back(std::move(row));
        rep.max_Tc.push_back(mx);
        rep.margin_achieved.push_back(mx > 0.0 ? T / mx : inf);
        rep.in_window.push_back(T >= margin * mx ? 1 : 0);
    }

    for (std::size_t t = 0; t < T_grid.size(); ++t) {
        if (!rep.in_window[t]) continue;
        if (t == 0 || !rep.in_window[t - 1])
            rep.window_intervals.emplace_back(T_grid[t], T_grid[t]);
        rep.window_intervals.back().second = T_grid[t];
    }

    rep.divergent.assign(static_cast<std::size_t>(rep.m), 0);
    rep.divergence_onset.assign(static_cast<std::size_t>(rep.m),
                                std::numeric_limits<double>::quiet_NaN());
    const double decade_lo = T_grid.back() / 10.0;
    for (int a = 0; a < rep.m; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        // Onset: first T where Tc reaches 10x its first finite positive value.
        double front = 0.0;
        for (std::size_t t = 0; t < T_grid.size(); ++t) {
            const double v = rep.Tc[t][ai];
            if (std::isfinite(v) && v > 1e-300) {
                front = v;
                break;
            }
        }
        if (front > 0.0) {
            for (std::size_t t = 0; t < T_grid.size(); ++t) {
                const double v = rep.Tc[t][ai];
                if (v >= 10.0 * front) {
                    rep.divergence_onset[ai] = T_grid[t];
                    break;
                }
            }
        }
        // Log-slope over the last decade of T.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int npts = 0;
        bool blew_up = false;
        for (std::size_t t = 0; t < T_grid.size(); ++t) {
            if (T_grid[t] < decade_lo) continue;
            const double v = rep.Tc[t][ai];
            if (!std::isfinite(v)) {
                blew_up = true;
                break;
            }
            if (v <= 1e-300) continue;
            const double x = std::log(T_grid[t]), y = std::log(v);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++npts;
        }
        if (blew_up) {
            rep.divergent[ai] = 1;
        } else if (npts >= 3) {
            const double denom = npts * sxx - sx * sx;
            if (denom > 0.0) {
                const double slope = (npts * sxy - sx * sy) / denom;
                if (slope > 1.0) rep.divergent[ai] = 1;
            }
        }
    }
    return rep;
}

Trajectory adiabatic_evolve(const FrameFamily& frames, const Mat& rho0, double T) {
    require_one_dim(frames, "adiabatic evolution");
    if (!(T > 0.0)) throw InvalidArgument("total time T must be positive");
    const TransportCoefficients tc = transport_coefficients(frames, rho0, T);
    const int m = frames.block_count();
    const std::size_t npts = frames.grid.size();
    const auto gamma = eigenvalue_paths(frames);

    Trajectory traj;
    traj.grid = frames.grid;
    traj.total_time = T;
    traj.method = "adiabatic-decoupled";
    traj.steps = static_cast<int>(npts) - 1;
    traj.states.resize(npts);

    std::vector<std::vector<cx>> Omega(static_cast<std::size_t>(m));
    for (int b = 0; b < m; ++b)
        Omega[static_cast<std::size_t>(b)] =
            cumtrapz(frames.grid, gamma[static_cast<std::size_t>(b)]);

    const int sdim = static_cast<int>(frames.frames.front().blocks.front().right.front().size());
    for (std::size_t k = 0; k < npts; ++k) {
        Vec v = Vec::Zero(sdim);
        for (int b = 0; b < m; ++b) {
            const auto bi = static_cast<std::size_t>(b);
            const cx expo = T * Omega[bi][k];
            if (expo.real() > kExpRange)
                throw NumericalError("adiabatic propagation overflowed: a block "
                                     "grows beyond double range (Re T*Omega > 700)");
            v += tc.p[bi][k] * std::exp(expo) *
                 frames.frames[k].blocks[bi].right.front();
        }
        traj.states[k] = v;
    }
    return traj;
}

}  // namespace aqo
