#include "fbrk/errors.hpp"
#include "fbrk/vn_core.hpp"

#include "oracles/vn_stage_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace fbrk;

namespace {

constexpr double pi = std::numbers::pi;

oracle::StageInputs oracle_inputs(const LinearWaveParams& p, const FBWeights& w) {
    return {p.nu, 2.0 * std::sin(p.k_dx / 2.0), 2.0 * std::sin(p.l_dy / 2.0),
            p.dt_f * std::cos(p.k_dx / 2.0) * std::cos(p.l_dy / 2.0), p.dt_f, p.U, p.V,
            w.beta1, w.beta2, w.beta3};
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

// Records the thickness/momentum calls made by the stepper.
struct RecordingModel {
    using Momentum = FourierVelocity;
    using Thickness = cplx;
    FourierModel inner;
    mutable std::vector<cplx> thickness_results;
    mutable std::vector<cplx> momentum_h_args;

    FourierVelocity momentum_tendency(const FourierVelocity& w, const cplx& eta) const {
        momentum_h_args.push_back(eta);
        return inner.momentum_tendency(w, eta);
    }
    cplx thickness_tendency(const FourierVelocity& w, const cplx& eta) const {
        thickness_results.push_back(inner.thickness_tendency(w, eta));
        return thickness_results.back();
    }
};

const FBWeights kC1U0{0.500, 0.500, 0.344};
const FBWeights kC2U0{0.516, 0.532, 0.331};

} // namespace

TEST(BuildAmplification, ZeroStepIsIdentity) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> angle(0.0, pi), beta(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        LinearWaveParams p;
        p.nu = 0.0;
        p.dt_f = 0.0;
        p.k_dx = angle(rng);
        p.l_dy = angle(rng);
        const auto sys = build_amplification(p, FBWeights{beta(rng), beta(rng), beta(rng)});
        EXPECT_LT(frobenius_norm(sys.G - Mat3::identity()), 1e-15);
        EXPECT_EQ(norm2(sys.b), 0.0);
    }
}

TEST(BuildAmplification, ZeroMeanFlowHasNoForcing) {
    LinearWaveParams p;
    p.nu = 1.3;
    p.k_dx = 0.7;
    p.l_dy = 2.1;
    p.dt_f = 0.05;
    const auto sys = build_amplification(p, kC1U0);
    EXPECT_EQ(norm2(sys.b), 0.0);
}

TEST(BuildAmplification, MatchesHandTranscribedStagesAtGridScale) {
    LinearWaveParams p = LinearWaveParams::grid_scale();
    p.nu = 0.5;
    const auto sys = build_amplification(p, kC1U0);
    const auto ref = oracle::fbrk32_fourier_matrix(oracle_inputs(p, kC1U0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(std::abs(sys.G(i, j) - ref[i * 3 + j]), 1e-14);
}

TEST(BuildAmplification, AffineMapMatchesStageOracleOnRandomInputs) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        LinearWaveParams p;
        p.nu = 3.0 * unit(rng);
        p.k_dx = pi * unit(rng);
        p.l_dy = pi * unit(rng);
        p.dt_f = 0.1 * unit(rng);
        p.U = 0.3 * sym(rng);
        p.V = 0.3 * sym(rng);
        const FBWeights w{unit(rng), unit(rng), unit(rng)};
        const Vec3 state{cplx(sym(rng), sym(rng)), cplx(sym(rng), sym(rng)), cplx(sym(rng), sym(rng))};

        const auto sys = build_amplification(p, w);
        Vec3 mapped = sys.G * state;
        for (std::size_t i = 0; i < 3; ++i) mapped[i] += sys.b[i];
        const auto ref = oracle::fbrk32_fourier_step(oracle_inputs(p, w), {state[0], state[1], state[2]});
        double err = 0.0;
        for (std::size_t i = 0; i < 3; ++i) err += std::norm(mapped[i] - ref[i]);
        EXPECT_LE(std::sqrt(err), 1e-12 * (1.0 + norm2(state)));
    }
}

TEST(BuildAmplification, NonFiniteParameterIsDomainError) {
    LinearWaveParams p;
    p.nu = std::nan("");
    EXPECT_THROW(build_amplification(p, kC1U0), DomainError);
    p.nu = 1.0;
    EXPECT_THROW(build_amplification(p, FBWeights{0.5, INFINITY, 0.3}), DomainError);
}

TEST(BuildAmplification, ThicknessStagesAreWeightIndependent) {
    LinearWaveParams p;
    p.nu = 0.9;
    p.k_dx = 1.1;
    p.l_dy = 0.4;
    p.dt_f = 0.02;
    p.U = 0.03;
    const SplitState<RecordingModel> s{{cplx(0.2, -0.1), cplx(0.4, 0.3)}, cplx(-0.5, 0.25)};

    std::vector<cplx> first_stage;
    for (const FBWeights w : {kC1U0, kC2U0, FBWeights{0.1, 0.9, 0.7}, kRK3LikeWeights}) {
        RecordingModel model{FourierModel{p}, {}, {}};
        const auto next = advance(model, s, SchemeSpec::fbrk32(w), 1.0);
        ASSERT_EQ(model.thickness_results.size(), 3u);
        first_stage.push_back(model.thickness_results[0]);
        // eta^{n+1} is eta^n plus one full thickness tendency, with no weight in sight.
        EXPECT_EQ(next.h, s.h + model.thickness_results[2]);
    }
    for (const auto& t : first_stage) EXPECT_EQ(t, first_stage.front());
}

TEST(BuildAmplification, RK3LikeWeightsUseRK3ThicknessInStagesOneAndThree) {
    LinearWaveParams p;
    p.nu = 0.7;
    p.k_dx = 2.0;
    p.l_dy = 1.0;
    const SplitState<RecordingModel> s{{cplx(0.3, 0.0), cplx(0.0, -0.2)}, cplx(0.1, 0.6)};
    RecordingModel model{FourierModel{p}, {}, {}};
    advance(model, s, SchemeSpec::fbrk32(kRK3LikeWeights), 1.0);
    ASSERT_EQ(model.momentum_h_args.size(), 3u);
    const cplx h_half = s.h + 0.5 * model.thickness_results[1];
    EXPECT_EQ(model.momentum_h_args[0], s.h);
    EXPECT_LT(std::abs(model.momentum_h_args[2] - h_half), 1e-15);
    EXPECT_LT(std::abs(model.momentum_h_args[1] - (2.0 / 3.0 * h_half + 1.0 / 3.0 * s.h)), 1e-15);
}

TEST(Spectrum, IdentityAndDiagonal) {
    const auto id = spectrum(Mat3::identity());
    EXPECT_NEAR(id.spectral_radius, 1.0, 1e-15);
    for (const auto& l : id.eigenvalues) EXPECT_NEAR(std::abs(l - 1.0), 0.0, 1e-15);

    Mat3 d;
    d(0, 0) = 0.5;
    d(1, 1) = cplx(0.0, 1.0);
    d(2, 2) = -0.3;
    EXPECT_NEAR(spectrum(d).spectral_radius, 1.0, 1e-15);
}

TEST(Spectrum, EigenpairResidualsOnRandomAndAmplificationMatrices) {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Mat3> cases;
    for (int t = 0; t < 300; ++t) {
        Mat3 m;
        for (auto& x : m.a) x = cplx(n(rng), n(rng));
        cases.push_back(m);
    }
    for (int t = 0; t < 300; ++t) {
        LinearWaveParams p = LinearWaveParams::grid_scale(0.25 * unit(rng));
        p.nu = 2.5 * unit(rng);
        p.k_dx = pi * unit(rng);
        p.l_dy = pi * unit(rng);
        cases.push_back(build_amplification(p, FBWeights{unit(rng), unit(rng), unit(rng)}).G);
    }
    for (const auto& G : cases) {
        const auto r = spectrum(G);
        std::array<oracle::cd, 9> rm{};
        std::copy(G.a.begin(), G.a.end(), rm.begin());
        EXPECT_NEAR(r.spectral_radius, oracle::spectral_radius_eigen(rm), 1e-9 * std::max(1.0, frobenius_norm(G)));
        for (std::size_t k = 0; k < 3; ++k) {
            Vec3 res = G * r.eigenvectors[k];
            for (std::size_t i = 0; i < 3; ++i) res[i] -= r.eigenvalues[k] * r.eigenvectors[k][i];
            EXPECT_NEAR(norm2(r.eigenvectors[k]), 1.0, 1e-12);
            EXPECT_LE(norm2(res), 1e-9 * frobenius_norm(G));
        }
    }
}

TEST(NuMax, PublishedRowsZeroAndLargestFroude) {
    EXPECT_NEAR(nu_max(kC1U0, LinearWaveParams::grid_scale(0.0)).nu_max, 1.767, 0.01);
    EXPECT_NEAR(nu_max(FBWeights{0.656, 0.938, 0.188}, LinearWaveParams::grid_scale(0.25)).nu_max, 0.853, 0.01);
}

TEST(NuMax, RK3LikeWeightsAgreeWithBruteForceScan) {
    const auto tmpl = LinearWaveParams::grid_scale();
    const double tol = 1e-3;
    const auto r = nu_max(kRK3LikeWeights, tmpl, tol);
    auto in = oracle_inputs(tmpl, kRK3LikeWeights);
    const double scanned = oracle::nu_max_scan(in, 1e-4, 4.0, kStabilitySlack);
    EXPECT_NEAR(r.nu_max, scanned, tol + 1e-4);
    EXPECT_FALSE(r.unstable_everywhere);
}

TEST(NuMax, NoInstabilityBelowReturnedValue) {
    const auto tmpl = LinearWaveParams::grid_scale(0.05);
    const FBWeights w{0.531, 0.531, 0.313};
    const double value = nu_max(w, tmpl).nu_max;
    LinearWaveParams p = tmpl;
    for (double nu = 1e-3; nu <= value; nu += 1e-3) {
        p.nu = nu;
        EXPECT_LE(spectral_radius(build_amplification(p, w).G), 1.0 + kStabilitySlack) << "nu=" << nu;
    }
}

TEST(NuMax, UniversallyUnstableWeightsAreFlagged) {
    const auto r = nu_max(FBWeights{5.0, 5.0, 5.0}, LinearWaveParams::grid_scale());
    EXPECT_TRUE(r.unstable_everywhere);
    EXPECT_EQ(r.nu_max, 0.0);
    EXPECT_EQ(cost_c1(FBWeights{5.0, 5.0, 5.0}, LinearWaveParams::grid_scale()), kUnstableCost);
}

TEST(NuMax, ReferenceSchemesOnGridScaleWave) {
    // Three-stage RK on a purely imaginary spectrum is stable up to |lambda dt| = sqrt(3);
    // the grid-scale wave has |lambda dt| = 2 sqrt(2) nu.
    const double expected = std::sqrt(3.0) / (2.0 * std::sqrt(2.0));
    NuMaxOptions opt;
    opt.tol = 1e-4;
    EXPECT_NEAR(nu_max(SchemeSpec::ssprk3(), LinearWaveParams::grid_scale(), opt).nu_max, expected, 2e-4);
    EXPECT_NEAR(nu_max(SchemeSpec::rk3(), LinearWaveParams::grid_scale(), opt).nu_max, expected, 2e-4);
}

TEST(AnalyticG, ZeroStepIsIdentity) {
    const Mat3 g = analytic_G(LinearWaveParams{}, 0.0, 70.0, 1e-5, 2e-5, 1e-4);
    EXPECT_LT(frobenius_norm(g - Mat3::identity()), 1e-15);
}

TEST(AnalyticG, UnitaryWithUnitModulusEigenvalues) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const Mat3 g = analytic_G(LinearWaveParams{}, 1000.0 * unit(rng), 70.0, 1e-4 * unit(rng),
                                  1e-4 * unit(rng), 1e-4 * unit(rng));
        EXPECT_LE(frobenius_norm(g.adjoint() * g - Mat3::identity()), 1e-12);
        for (const auto& l : eigenvalues(g)) EXPECT_NEAR(std::abs(l), 1.0, 1e-12);
    }
}

TEST(AnalyticG, OneDimensionalBlockHasWaveEigenvalues) {
    const double c = 70.0, k = 3e-5, dt = 500.0;
    const Mat3 g = analytic_G(LinearWaveParams{}, dt, c, k, 0.0, 0.0);
    Mat2 block;
    block(0, 0) = g(0, 0);
    block(0, 1) = g(0, 2);
    block(1, 0) = g(2, 0);
    block(1, 1) = g(2, 2);
    const Vec2 ev = eigenvalues(block);
    const cplx plus = std::exp(cplx(0.0, c * k * dt));
    const cplx minus = std::exp(cplx(0.0, -c * k * dt));
    const double direct = std::abs(ev[0] - plus) + std::abs(ev[1] - minus);
    const double swapped = std::abs(ev[0] - minus) + std::abs(ev[1] - plus);
    EXPECT_LT(std::min(direct, swapped), 1e-13);
}

TEST(AnalyticG, MeanFlowIsDomainError) {
    EXPECT_THROW(analytic_G(LinearWaveParams::grid_scale(0.05), 1.0, 1.0, 1.0, 1.0, 0.0), DomainError);
}

TEST(Costs, C1MatchesPublishedValues) {
    EXPECT_NEAR(cost_c1(kC1U0, LinearWaveParams::grid_scale()), 1.0 / 1.767, 0.004);
    EXPECT_NEAR(cost_c1(kC2U0, LinearWaveParams::grid_scale()), 1.0 / 1.804, 0.004);
}

TEST(Costs, C2IntegralMatchesIndependentQuadrature) {
    // Reference integrals from an independent Simpson/scipy.linalg.expm evaluation
    // (48 intervals, grid-scale wave, f dx / c = 1e-2).
    const auto tmpl = LinearWaveParams::grid_scale();
    EXPECT_NEAR(c2_integral(kC1U0, tmpl), 0.3137766112771286, 1e-9);
    EXPECT_NEAR(c2_integral(kC2U0, tmpl), 0.31512556296323135, 1e-9);
}

TEST(Costs, C2PrefersItsOwnOptimum) {
    const auto tmpl = LinearWaveParams::grid_scale();
    EXPECT_LE(cost_c2(kC2U0, tmpl), cost_c2(kC1U0, tmpl));
}

TEST(Costs, C2IsC1PlusNonnegativeIntegral) {
    const auto tmpl = LinearWaveParams::grid_scale();
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        const FBWeights w{unit(rng), unit(rng), unit(rng)};
        const double integral = c2_integral(w, tmpl);
        EXPECT_GE(integral, 0.0);
        EXPECT_EQ(cost_c2(w, tmpl), cost_c1(w, tmpl) + integral);
    }
    // With a vanishing integrand the quadrature contributes exactly nothing.
    EXPECT_EQ(simpson([](double) { return 0.0; }, 0.0, pi / 6.0, 48), 0.0);
}

TEST(Costs, SimpsonRefinementIsConverged) {
    const auto tmpl = LinearWaveParams::grid_scale();
    for (const FBWeights& w : {kC1U0, kC2U0, FBWeights{0.3, 0.6, 0.2}})
        EXPECT_LT(std::abs(c2_integral(w, tmpl, 48) - c2_integral(w, tmpl, 96)), 1e-6);
}

TEST(Costs, C2RejectsMeanFlow) {
    EXPECT_THROW(cost_c2(kC1U0, LinearWaveParams::grid_scale(0.05)), DomainError);
}

TEST(Consistency, AmplificationMatrixIsSecondOrderAccurate) {
    // Compare with the exact propagator of the semi-discrete system (discrete
    // wavenumbers and averaged Coriolis), letting dt f shrink with nu.
    LinearWaveParams p;
    p.k_dx = 0.9;
    p.l_dy = 2.3;
    const double f_over_nu = 0.2;
    for (const FBWeights& w : {kC1U0, kC2U0, FBWeights{0.359, 0.578, 0.234}}) {
        std::vector<double> nus, errs;
        for (double nu : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
            p.nu = nu;
            p.dt_f = f_over_nu * nu;
            const Mat3 G = build_amplification(p, w).G;
            const Mat3 exact = exact_propagator(p.phi(), nu * p.K(), nu * p.L());
            nus.push_back(nu);
            errs.push_back(frobenius_norm(G - exact));
        }
        EXPECT_GE(slope(nus, errs), 2.7);
    }
}

TEST(Amp1D, IdentityAtZero) {
    EXPECT_LT(frobenius_norm(amp_1d(0.0, kC1U0) - Mat2::identity()), 1e-15);
}

TEST(Amp1D, MatchesStageOracle) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double x = pi * unit(rng);
        const FBWeights w{unit(rng), unit(rng), unit(rng)};
        const Mat2 m = amp_1d(x, w);
        for (std::size_t j = 0; j < 2; ++j) {
            std::array<oracle::cd, 2> e{0.0, 0.0};
            e[j] = 1.0;
            const auto col = oracle::fbrk32_wave1d_step(x, w.beta1, w.beta2, w.beta3, e);
            EXPECT_LT(std::abs(m(0, j) - col[0]), 1e-14);
            EXPECT_LT(std::abs(m(1, j) - col[1]), 1e-14);
        }
    }
}

TEST(Amp1D, EigenvaluesApproachExactPhaseAtThirdOrder) {
    for (const FBWeights& w : {kC1U0, kC2U0, FBWeights{0.531, 0.531, 0.313}, FBWeights{0.656, 0.938, 0.188}}) {
        std::vector<double> xs, errs;
        for (double x : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
            const Vec2 ev = eigenvalues(amp_1d(x, w));
            const cplx plus = std::exp(cplx(0.0, x)), minus = std::exp(cplx(0.0, -x));
            const double err = std::min(std::max(std::abs(ev[0] - plus), std::abs(ev[1] - minus)),
                                        std::max(std::abs(ev[0] - minus), std::abs(ev[1] - plus)));
            xs.push_back(x);
            errs.push_back(err);
        }
        EXPECT_GE(slope(xs, errs), 2.8);
    }
}

TEST(Amp1D, NegativeArgumentIsDomainError) {
    EXPECT_THROW(amp_1d(-0.1, kC1U0), DomainError);
}

TEST(DispersionCurve, StartsAtOneAndIsConjugationClosed) {
    const auto curve = dispersion_curve(kC2U0, 256);
    ASSERT_EQ(curve.size(), 256u);
    EXPECT_EQ(curve.front().ktilde_nu, 0.0);
    EXPECT_LT(std::abs(curve.front().lambda1 - 1.0), 1e-15);
    EXPECT_LT(std::abs(curve.front().lambda2 - 1.0), 1e-15);
    EXPECT_NEAR(curve.back().ktilde_nu, pi, 1e-15);
    for (const auto& s : curve) {
        const double direct = std::abs(s.lambda1 - std::conj(s.lambda2));
        const double self = std::abs(s.lambda1 - std::conj(s.lambda1)) + std::abs(s.lambda2 - std::conj(s.lambda2));
        EXPECT_LT(std::min(direct, self), 1e-12) << "x=" << s.ktilde_nu;
    }
}

TEST(DispersionCurve, StableBelowUnitKtildeNu) {
    // Independent bound: fine scan of the oracle's 1D stage map.
    auto radius = [](double x) {
        std::array<oracle::cd, 4> m{};
        for (int j = 0; j < 2; ++j) {
            std::array<oracle::cd, 2> e{0.0, 0.0};
            e[j] = 1.0;
            const auto col = oracle::fbrk32_wave1d_step(x, 0.516, 0.532, 0.331, e);
            m[j] = col[0];
            m[2 + j] = col[1];
        }
        const oracle::cd ht = 0.5 * (m[0] + m[3]);
        const oracle::cd root = std::sqrt(ht * ht - (m[0] * m[3] - m[1] * m[2]));
        return std::max(std::abs(ht + root), std::abs(ht - root));
    };
    double safe = 0.0;
    for (double x = 1e-4; x <= pi; x += 1e-4) {
        if (radius(x) > 1.0 + 1e-10) break;
        safe = x;
    }
    ASSERT_GT(safe, 1.0);

    for (const auto& s : dispersion_curve(kC2U0, 256)) {
        if (s.ktilde_nu > 1.0) break;
        EXPECT_LE(std::abs(s.lambda1), 1.0 + 1e-10);
        EXPECT_LE(std::abs(s.lambda2), 1.0 + 1e-10);
    }
}

TEST(DispersionCurve, TracksAreContinuous) {
    const auto curve = dispersion_curve(FBWeights{0.531, 0.531, 0.313}, 512);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_LT(std::abs(curve[i].lambda1 - curve[i - 1].lambda1), 0.1);
        EXPECT_LT(std::abs(curve[i].lambda2 - curve[i - 1].lambda2), 0.1);
    }
}

TEST(EffectiveCfl, Values) {
    EXPECT_NEAR(effective_cfl(1.804, pi, 3), 1.889, 1e-3);
    EXPECT_NEAR(effective_cfl(2.141, 1.0, 2), 1.071, 1e-3);
    EXPECT_NEAR(effective_cfl(0.37, pi, 1), 0.37 * pi, 1e-15);
    EXPECT_THROW(effective_cfl(0.0, pi, 3), DomainError);
}
