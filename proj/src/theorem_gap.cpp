#include "aqo/theorem_gap.hpp"

#include <cmath>

#include "aqo/errors.hpp"
#include "aqo/spectral.hpp"

namespace aqo {

namespace {

double max_abs(const Mat& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

const std::vector<double>& probe_points() {
    static const std::vector<double> pts{0.0, 0.25, 0.5, 0.75, 1.0};
    return pts;
}

}  // namespace

ConjugationFamily conjugation_superop(const std::function<Mat(double)>& u_family,
                                      const OperatorBasis& basis) {
    const int dim = basis.strings.front().dim();
    const int sdim = basis.size();

    auto build = [u_family, basis, dim](double s) {
        const Mat u = u_family(s);
        if (u.rows() != dim || u.cols() != dim)
            throw InvalidArgument("unitary family dimension does not match the basis");
        const double ures =
            (u * u.adjoint() - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
        if (ures > 1e-12)
            throw InvalidArgument("input family is not unitary (residual " +
                                  std::to_string(ures) + " at s = " +
                                  std::to_string(s) + ")");
        return superop_from_action(
            [&u](const Mat& x) { return (u.adjoint() * x * u).eval(); }, basis);
    };

    ConjugationFamily fam;
    fam.dim = sdim;
    for (double s : probe_points()) {
        const Mat V = build(s);
        fam.unitarity_residual = std::max(
            fam.unitarity_residual,
            (V * V.adjoint() - Mat::Identity(sdim, sdim)).cwiseAbs().maxCoeff());
        if (s == 0.0) {
            const double id_res =
                (V - Mat::Identity(sdim, sdim)).cwiseAbs().maxCoeff();
            if (id_res > 1e-11)
                throw InvalidArgument("conjugation family must start at the "
                                      "identity: |V(0) - I| = " +
                                      std::to_string(id_res));
        }
    }
    if (fam.unitarity_residual > 1e-11)
        throw InvalidArgument("induced superoperator is not orthogonal "
                              "(residual " + std::to_string(fam.unitarity_residual) + ")");
    fam.V = build;
    return fam;
}

double sufficient_condition_check(const std::function<Mat(double)>& R_of_s,
                                  const ConjugationFamily& V,
                                  const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("check grid is empty");
    const Mat R0 = R_of_s(0.0);
    const double scale = std::max(max_abs(R0), 1e-300);
    double res = 0.0;
    for (double s : grid) {
        const Mat Vs = V.V(s);
        res = std::max(res, max_abs(R_of_s(s) - Vs.adjoint() * R0 * Vs) / scale);
    }
    return res;
}

double commutator_check(const Mat& R, const ConjugationFamily& V,
                        const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("check grid is empty");
    const double r_scale = std::max(max_abs(R), 1e-300);
    double res = 0.0;
    for (double s : grid) {
        const Mat Vs = V.V(s);
        const double v_scale = std::max(max_abs(Vs), 1e-300);
        res = std::max(res, max_abs(R * Vs - Vs * R) / (r_scale * v_scale));
    }
    return res;
}

double necessity_probe(const std::function<Mat(double)>& R_of_s,
                       const ConjugationFamily& V,
                       const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("check grid is empty");
    const Mat R0 = R_of_s(0.0);
    const double scale = std::max(max_abs(R0), 1e-300);
    double res = 0.0;
    for (double s : grid) {
        const Mat Vs = V.V(s);
        res = std::max(res, max_abs(Vs * R_of_s(s) * Vs.adjoint() - R0) / scale);
    }
    return res;
}

SpectralDriftReport constant_spectrum_check(const GeneratorFamily& fam,
                                            const std::vector<double>& grid) {
    SpectralDriftReport rep;
    rep.grid = grid;
    rep.paths = track_eigenvalue_paths(fam, grid);
    for (const auto& path : rep.paths) {
        for (const cx& v : path)
            rep.max_drift = std::max(rep.max_drift, std::abs(v - path.front()));
    }
    const Mat L0 = fam.L(grid.front());
    rep.threshold = 1e-9 * std::max(max_abs(L0), 1e-300);
    rep.constant = rep.max_drift < rep.threshold;

    try {
        const LJSpectrum spec = spectrum(L0);
        bool all_one = true;
        for (int d : spec.block_dims)
            if (d != 1) all_one = false;
        rep.all_one_dim = all_one;
        rep.block_structure = all_one ? "all-one-dimensional" : "defective";
    } catch (const NumericalError& e) {
        rep.all_one_dim = false;
        rep.block_structure = std::string("undetermined: ") + e.what();
    } catch (const StructuralError& e) {
        rep.all_one_dim = false;
        rep.block_structure = std::string("undetermined: ") + e.what();
    }
    return rep;
}

}  // namespace aqo
