#include "fbrk/small_matrix.hpp"

#include "oracles/vn_stage_oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fbrk;

namespace {

Mat3 random_matrix(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Mat3 m;
    for (auto& x : m.a) x = cplx(n(rng), n(rng));
    return m;
}

Mat3 random_skew_hermitian(std::mt19937_64& rng, double scale) {
    const Mat3 r = random_matrix(rng, scale);
    Mat3 s = r - r.adjoint();
    s *= 0.5;
    return s;
}

} // namespace

TEST(SmallMatrix, SolveRecoversIdentity) {
    std::mt19937_64 rng(7);
    const Mat3 a = random_matrix(rng);
    const Mat3 x = solve(a, a);
    EXPECT_LT(frobenius_norm(x - Mat3::identity()), 1e-13);
}

TEST(SmallMatrix, PadeExponentialOfDiagonal) {
    Mat3 d;
    d(0, 0) = cplx(0.3, 1.0);
    d(1, 1) = cplx(-2.0, 0.0);
    d(2, 2) = cplx(0.0, 5.0);
    const Mat3 e = expm_pade(d);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(e(i, i) - std::exp(d(i, i))), 1e-13);
    EXPECT_LT(std::abs(e(0, 1)), 1e-15);
}

TEST(SmallMatrix, SkewHermitianExponentialAgreesWithPadeAndIsUnitary) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat3 a = random_skew_hermitian(rng, 2.0);
        const Mat3 e = expm_skew_hermitian(a);
        EXPECT_LT(frobenius_norm(e - expm_pade(a)), 1e-11);
        EXPECT_LT(frobenius_norm(e.adjoint() * e - Mat3::identity()), 1e-12);
    }
}

TEST(SmallMatrix, SkewHermitianExponentialOfZeroIsIdentity) {
    EXPECT_LT(frobenius_norm(expm_skew_hermitian(Mat3{}) - Mat3::identity()), 1e-15);
}

TEST(SmallMatrix, EigenvaluesOfIdentityAndDiagonal) {
    const Vec3 ones = eigenvalues(Mat3::identity());
    for (const auto& l : ones) EXPECT_LT(std::abs(l - 1.0), 1e-14);

    Mat3 d;
    d(0, 0) = 0.5;
    d(1, 1) = cplx(0.0, 1.0);
    d(2, 2) = -0.3;
    const Vec3 ev = eigenvalues(d);
    double radius = 0.0;
    for (const auto& l : ev) radius = std::max(radius, std::abs(l));
    EXPECT_NEAR(radius, 1.0, 1e-14);
}

TEST(SmallMatrix, CardanoEigenvaluesMatchEigenSolver) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const Mat3 m = random_matrix(rng);
        std::array<oracle::cd, 9> rm{};
        std::copy(m.a.begin(), m.a.end(), rm.begin());
        auto expected = oracle::eigenvalues_eigen(rm);
        const Vec3 got = eigenvalues(m);
        // Greedy matching; random matrices have well separated eigenvalues.
        for (const auto& g : got) {
            auto best = std::min_element(expected.begin(), expected.end(), [&](auto a, auto b) {
                return std::abs(a - g) < std::abs(b - g);
            });
            EXPECT_LT(std::abs(*best - g), 1e-9 * std::max(1.0, frobenius_norm(m)));
            *best = oracle::cd(1e300, 0.0);
        }
    }
}

TEST(SmallMatrix, EigenvectorOfRankOneShift) {
    // diag(2, 2, 5): lambda = 2 has a two-dimensional eigenspace.
    Mat3 d;
    d(0, 0) = 2.0;
    d(1, 1) = 2.0;
    d(2, 2) = 5.0;
    const Vec3 v = eigenvector(d, 2.0);
    const Vec3 r = d * v;
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LT(std::abs(r[i] - 2.0 * v[i]), 1e-14);
    EXPECT_NEAR(norm2(v), 1.0, 1e-14);
}
