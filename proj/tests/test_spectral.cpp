#include <doctest.h>

#include <random>

#include "aqo/dj.hpp"
#include "aqo/spectral.hpp"

using namespace aqo;

namespace {

Mat random_complex(int n, std::mt19937& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = cx{u(gen), u(gen)};
    return m;
}

GeneratorFamily diagonal_family(std::function<Vec(double)> diag, int n) {
    GeneratorFamily fam;
    fam.dim = n;
    fam.L = [diag, n](double s) {
        Mat m = Mat::Zero(n, n);
        m.diagonal() = diag(s);
        return m;
    };
    return fam;
}

}  // namespace

TEST_CASE("diagonal matrix: one-dimensional blocks in canonical order") {
    Mat L = Mat::Zero(4, 4);
    L.diagonal() << cx{0, 0}, cx{-2, 0}, cx{-1, 3}, cx{-1, -3};
    const JordanFrame frame = analyze(L);
    REQUIRE(frame.blocks.size() == 4);
    // Order: |Im| ascending, then -Re ascending, then Im ascending.
    CHECK(std::abs(frame.blocks[0].eigenvalue - cx{0, 0}) < 1e-14);
    CHECK(std::abs(frame.blocks[1].eigenvalue - cx{-2, 0}) < 1e-14);
    CHECK(std::abs(frame.blocks[2].eigenvalue - cx{-1, -3}) < 1e-14);
    CHECK(std::abs(frame.blocks[3].eigenvalue - cx{-1, 3}) < 1e-14);
    for (const JordanBlock& b : frame.blocks) CHECK(b.dim == 1);
    CHECK(frame.spectrum.diagonalizable);

    const FrameResiduals res = verify_jordan_relations(L, frame);
    CHECK(res.right_chain < 1e-12);
    CHECK(res.left_chain < 1e-12);
    CHECK(res.biorthonormality < 1e-12);
    CHECK(res.reconstruction < 1e-12);
}

TEST_CASE("random diagonalizable 9x9: biorthonormality below 1e-9") {
    std::mt19937 gen(2024);
    const Mat L = random_complex(9, gen);
    const JordanFrame frame = analyze(L);
    CHECK(frame.spectrum.total_dim() == 9);
    const FrameResiduals res = verify_jordan_relations(L, frame);
    CHECK(res.biorthonormality < 1e-9);
    CHECK(res.reconstruction < 1e-9);
}

TEST_CASE("defective eigenvalue: merged cluster with a dim-2 chain") {
    Mat J(2, 2);
    J << 0.5, 1.0, 0.0, 0.5;
    Mat P(2, 2);
    P << 1.0, 0.3, -0.2, 1.1;
    const Mat L = P * J * P.inverse();

    const JordanFrame frame = analyze(L);
    REQUIRE(frame.blocks.size() == 1);
    CHECK(frame.blocks[0].dim == 2);
    CHECK(std::abs(frame.blocks[0].eigenvalue - cx{0.5, 0}) < 1e-6);
    CHECK_FALSE(frame.spectrum.diagonalizable);

    const FrameResiduals res = verify_jordan_relations(L, frame);
    CHECK(res.right_chain < 1e-6);
    CHECK(res.left_chain < 1e-6);
    CHECK(res.biorthonormality < 1e-6);
    CHECK(res.reconstruction < 1e-6);
}

TEST_CASE("mixed Weyr structure: dims {2, 1} at one eigenvalue") {
    Mat J = Mat::Zero(3, 3);
    J(0, 0) = J(1, 1) = J(2, 2) = cx{-1.0, 0.5};
    J(0, 1) = 1.0;  // one 2-chain plus one 1-chain
    Mat P(3, 3);
    P << 1, 0.2, -0.1, 0.1, 1.2, 0.3, -0.3, 0.05, 0.9;
    const Mat L = P * J * P.inverse();

    const JordanFrame frame = analyze(L);
    REQUIRE(frame.blocks.size() == 2);
    CHECK(frame.blocks[0].dim == 2);  // larger chain first within a cluster
    CHECK(frame.blocks[1].dim == 1);
    CHECK(frame.blocks[0].cluster_id == frame.blocks[1].cluster_id);
    const FrameResiduals res = verify_jordan_relations(L, frame);
    CHECK(res.reconstruction < 1e-6);
    CHECK(res.biorthonormality < 1e-6);
}

TEST_CASE("semisimple degeneracy stays in one cluster of 1-dim blocks") {
    Mat L = Mat::Zero(3, 3);
    L.diagonal() << cx{-1, 0}, cx{-1, 0}, cx{-3, 0};
    const JordanFrame frame = analyze(L);
    REQUIRE(frame.blocks.size() == 3);
    // Ordering is (|Im|, -Re, Im) ascending: the -1 pair precedes -3.
    CHECK(std::abs(frame.blocks[0].eigenvalue - cx{-1, 0}) < 1e-14);
    CHECK(std::abs(frame.blocks[2].eigenvalue - cx{-3, 0}) < 1e-14);
    CHECK(frame.blocks[0].cluster_id == frame.blocks[1].cluster_id);
    CHECK(frame.blocks[2].cluster_id != frame.blocks[0].cluster_id);
    CHECK(frame.spectrum.diagonalizable);
}

TEST_CASE("dephasing model spectrum matches the closed forms") {
    for (double lambda : {0.1, 0.5, 0.99}) {
        const Mat L = dj_superop_analytic(0.3, lambda, 2);
        const LJSpectrum spec = spectrum(L);
        REQUIRE(spec.block_count() == 4);
        const double root = std::sqrt(1.0 - std::pow(lambda, 4));
        const cx expect[4] = {cx{0, 0}, cx{-2 * lambda * lambda, 0},
                              cx{-lambda * lambda, -root},
                              cx{-lambda * lambda, root}};
        for (int b = 0; b < 4; ++b) {
            CHECK(spec.block_dims[static_cast<std::size_t>(b)] == 1);
            CHECK(std::abs(spec.eigenvalues[static_cast<std::size_t>(b)] -
                           expect[b]) < 1e-10);
        }
    }
}

TEST_CASE("closed system (lambda = 0): eigenvalues 0 (doubly) and -i, +i") {
    const Mat L = dj_superop_analytic(0.6, 0.0, 2);
    const LJSpectrum spec = spectrum(L);
    REQUIRE(spec.block_count() == 4);
    CHECK(std::abs(spec.eigenvalues[0]) < 1e-12);
    CHECK(std::abs(spec.eigenvalues[1]) < 1e-12);
    CHECK(spec.cluster_of_block[0] == spec.cluster_of_block[1]);
    CHECK(std::abs(spec.eigenvalues[2] - cx{0, -1}) < 1e-12);
    CHECK(std::abs(spec.eigenvalues[3] - cx{0, 1}) < 1e-12);
    CHECK(spec.diagonalizable);
}

TEST_CASE("corrupted frame: biorthonormality residual reported as 1") {
    Mat L = Mat::Zero(3, 3);
    L.diagonal() << cx{0, 0}, cx{-1, 0}, cx{-3, 0};
    JordanFrame frame = analyze(L);
    frame.blocks[1].right[0] *= 2.0;
    const FrameResiduals res = verify_jordan_relations(L, frame);
    CHECK(res.biorthonormality == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("biorthonormal_frame validates the supplied spectrum") {
    Mat L = Mat::Zero(3, 3);
    L.diagonal() << cx{0, 0}, cx{-1, 0}, cx{-3, 0};
    const LJSpectrum spec = spectrum(L);
    const JordanFrame frame = biorthonormal_frame(L, spec);
    CHECK(verify_jordan_relations(L, frame).biorthonormality < 1e-12);

    Mat other = Mat::Zero(3, 3);
    other.diagonal() << cx{0, 0}, cx{-1.5, 0}, cx{-3, 0};
    CHECK_THROWS_AS(biorthonormal_frame(other, spec), InvalidArgument);
}

TEST_CASE("frame tracking is smooth for the dephasing model") {
    const DJInstance inst = make_dj_instance(1, "balanced:1", {0.1});
    const GeneratorFamily fam = dj_generator_family(inst);
    const FrameFamily frames = track_frames(fam, uniform_grid(101));
    CHECK(frames.block_count() == 4);
    CHECK(frames.max_path_jump < 1e-10);  // eigenvalues are s-independent
    CHECK(frames.min_overlap > 0.9);
    for (const JordanFrame& f : frames.frames) {
        REQUIRE(f.blocks.size() == 4);
        for (const JordanBlock& b : f.blocks) CHECK(b.dim == 1);
    }
}

TEST_CASE("designed eigenvalue crossing raises a structural error") {
    // gamma_1(s) = s and gamma_2(s) = 1 - s meet at s = 0.5: the clusters
    // merge there, which must be reported as a crossing with the interval.
    const GeneratorFamily fam = diagonal_family(
        [](double s) {
            Vec d(2);
            d << cx{s, 0}, cx{1.0 - s, 0};
            return d;
        },
        2);
    CHECK_THROWS_WITH_AS(
        track_frames(fam, uniform_grid(5)),
        doctest::Contains("merge"), StructuralError);
    CHECK_THROWS_WITH_AS(
        track_frames(fam, uniform_grid(5)),
        doctest::Contains("0.25"), StructuralError);
}

TEST_CASE("block-dimension change along the path raises a structural error") {
    GeneratorFamily fam;
    fam.dim = 2;
    fam.L = [](double s) {
        Mat m = Mat::Zero(2, 2);
        m(0, 1) = s;  // semisimple at s=0, defective for s>0
        return m;
    };
    CHECK_THROWS_AS(track_frames(fam, uniform_grid(3)), StructuralError);
}

TEST_CASE("tracked eigenvalue paths are constant for the dephasing model") {
    const DJInstance inst = make_dj_instance(1, "balanced:1", {0.5});
    const GeneratorFamily fam = dj_generator_family(inst);
    const auto paths = track_eigenvalue_paths(fam, uniform_grid(101));
    REQUIRE(paths.size() == 4);
    for (const auto& path : paths)
        for (const cx& v : path) CHECK(std::abs(v - path.front()) < 1e-10);
}

TEST_CASE("analysis output is deterministic") {
    std::mt19937 gen(99);
    const Mat L = random_complex(6, gen);
    const JordanFrame a = analyze(L);
    const JordanFrame b = analyze(L);
    REQUIRE(a.blocks.size() == b.blocks.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        CHECK(a.blocks[i].eigenvalue == b.blocks[i].eigenvalue);
        CHECK((a.blocks[i].right[0] - b.blocks[i].right[0]).norm() == 0.0);
    }
}

TEST_CASE("uniform grid endpoints and spacing") {
    const std::vector<double> g = uniform_grid(5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    CHECK(g[2] == doctest::Approx(0.5));
    CHECK_THROWS_AS(uniform_grid(1), InvalidArgument);
}

TEST_CASE("tracking input validation") {
    const DJInstance inst = make_dj_instance(1, "constant0", {0.1});
    const GeneratorFamily fam = dj_generator_family(inst);
    CHECK_THROWS_AS(track_frames(fam, {0.0}), InvalidArgument);
    CHECK_THROWS_AS(track_frames(fam, {0.0, 1.5}), InvalidArgument);
    CHECK_THROWS_AS(track_frames(fam, {0.5, 0.25}), InvalidArgument);
}
