#include "fbrk/vn_core.hpp"

#include "fbrk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fbrk {

namespace {

constexpr cplx I{0.0, 1.0};

bool all_finite(const LinearWaveParams& p) {
    return std::isfinite(p.nu) && std::isfinite(p.k_dx) && std::isfinite(p.l_dy) &&
           std::isfinite(p.dt_f) && std::isfinite(p.U) && std::isfinite(p.V);
}

void require_zero_mean_flow(const LinearWaveParams& p, const char* what) {
    if (p.U != 0.0 || p.V != 0.0)
        throw DomainError(std::string(what) + " is defined only for zero mean flow");
}

} // namespace

double LinearWaveParams::K() const { return 2.0 * std::sin(0.5 * k_dx); }
double LinearWaveParams::L() const { return 2.0 * std::sin(0.5 * l_dy); }
double LinearWaveParams::phi() const { return dt_f * std::cos(0.5 * k_dx) * std::cos(0.5 * l_dy); }

void LinearWaveParams::validate() const {
    if (!all_finite(*this)) throw DomainError("LinearWaveParams: non-finite parameter");
    if (nu < 0.0) throw DomainError("LinearWaveParams: negative Courant number");
    constexpr double pi = std::numbers::pi;
    if (k_dx < 0.0 || k_dx > pi || l_dy < 0.0 || l_dy > pi)
        throw DomainError("LinearWaveParams: wavenumber-grid products must lie in [0, pi]");
}

LinearWaveParams LinearWaveParams::grid_scale(double froude) {
    LinearWaveParams p;
    p.U = froude / std::numbers::sqrt2;
    p.V = froude / std::numbers::sqrt2;
    return p;
}

FourierVelocity FourierModel::momentum_tendency(const FourierVelocity& w, const cplx& eta) const {
    const double K = params.K();
    const double L = params.L();
    const double phi = params.phi();
    const cplx advect = I * (params.U * K * params.nu + params.V * L * params.nu);
    return {params.dt_f * params.V + phi * w.v - advect * w.u - I * K * params.nu * eta,
            -params.dt_f * params.U - phi * w.u - advect * w.v - I * L * params.nu * eta};
}

cplx FourierModel::thickness_tendency(const FourierVelocity& w, const cplx& eta) const {
    const double K = params.K();
    const double L = params.L();
    const cplx advect = I * (params.U * K * params.nu + params.V * L * params.nu);
    return -(I * K * params.nu * w.u + I * L * params.nu * w.v + advect * eta);
}

Vec3 apply_stages(const LinearWaveParams& params, const SchemeSpec& scheme, const Vec3& w) {
    const FourierModel model{params};
    const SplitState<FourierModel> s{{w[0], w[1]}, w[2]};
    const auto next = advance(model, s, scheme, 1.0);
    return {next.u.u, next.u.v, next.h};
}

AmplificationSystem build_amplification(const LinearWaveParams& params, const SchemeSpec& scheme) {
    params.validate();
    if (scheme.kind == SchemeKind::FBRK32 && !scheme.weights.finite())
        throw DomainError("build_amplification: non-finite FB weights");

    AmplificationSystem sys;
    sys.b = apply_stages(params, scheme, Vec3{});
    for (std::size_t j = 0; j < 3; ++j) {
        Vec3 e{};
        e[j] = 1.0;
        Vec3 col = apply_stages(params, scheme, e);
        for (std::size_t i = 0; i < 3; ++i) col[i] -= sys.b[i];
        sys.G.set_column(j, col);
    }
    return sys;
}

AmplificationSystem build_amplification(const LinearWaveParams& params, const FBWeights& weights) {
    return build_amplification(params, SchemeSpec::fbrk32(weights));
}

double spectral_radius(const Mat3& G) {
    const Vec3 lambdas = eigenvalues(G);
    return std::max({std::abs(lambdas[0]), std::abs(lambdas[1]), std::abs(lambdas[2])});
}

SpectrumResult spectrum(const Mat3& G) {
    SpectrumResult r;
    r.eigenvalues = eigenvalues(G);
    for (std::size_t k = 0; k < 3; ++k) {
        r.eigenvectors[k] = eigenvector(G, r.eigenvalues[k]);
        r.spectral_radius = std::max(r.spectral_radius, std::abs(r.eigenvalues[k]));
    }
    return r;
}

NuMaxResult nu_max(const SchemeSpec& scheme, const LinearWaveParams& template_params,
                   const NuMaxOptions& options) {
    if (!(options.tol > 0.0) || !(options.scan_step > 0.0) || !(options.scan_max > options.scan_step))
        throw DomainError("nu_max: tolerance and scan step must be positive");
    LinearWaveParams p = template_params;
    p.nu = 0.0;
    p.validate();

    auto unstable = [&](double nu) {
        p.nu = nu;
        return spectral_radius(build_amplification(p, scheme).G) > 1.0 + options.slack;
    };

    const int n_scan = static_cast<int>(std::floor(options.scan_max / options.scan_step + 1e-9));
    double stable = 0.0;
    for (int i = 1; i <= n_scan; ++i) {
        const double nu = i * options.scan_step;
        if (!unstable(nu)) {
            stable = nu;
            continue;
        }
        if (i == 1) return {0.0, true, false};
        double lo = stable;
        double hi = nu;
        while (hi - lo > options.tol) {
            const double mid = 0.5 * (lo + hi);
            if (unstable(mid)) hi = mid;
            else lo = mid;
        }
        return {lo, false, false};
    }
    return {stable, false, true};
}

NuMaxResult nu_max(const FBWeights& weights, const LinearWaveParams& template_params, double tol) {
    NuMaxOptions options;
    options.tol = tol;
    return nu_max(SchemeSpec::fbrk32(weights), template_params, options);
}

Mat3 exact_propagator(double f_dt, double ck_dt, double cl_dt) {
    Mat3 a;
    a(0, 1) = f_dt;
    a(0, 2) = -I * ck_dt;
    a(1, 0) = -f_dt;
    a(1, 2) = -I * cl_dt;
    a(2, 0) = -I * ck_dt;
    a(2, 1) = -I * cl_dt;
    return expm_skew_hermitian(a);
}

Mat3 analytic_G(const LinearWaveParams& params, double dt, double c, double k, double l, double f) {
    require_zero_mean_flow(params, "analytic_G");
    if (!std::isfinite(dt) || !std::isfinite(c) || !std::isfinite(k) || !std::isfinite(l) || !std::isfinite(f))
        throw DomainError("analytic_G: non-finite input");
    return exact_propagator(f * dt, c * k * dt, c * l * dt);
}

double cost_c1(const FBWeights& weights, const LinearWaveParams& template_params, double tol) {
    const NuMaxResult r = nu_max(weights, template_params, tol);
    if (r.unstable_everywhere || r.nu_max <= 0.0) return kUnstableCost;
    return 1.0 / r.nu_max;
}

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    if (intervals < 2 || intervals % 2 != 0) throw DomainError("simpson: need an even interval count >= 2");
    const double h = (b - a) / intervals;
    double sum = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

double c2_integrand(const FBWeights& weights, const LinearWaveParams& template_params, double nu) {
    require_zero_mean_flow(template_params, "C2");
    LinearWaveParams p = template_params;
    p.nu = nu;
    p.dt_f = template_params.dt_f * nu;
    const Mat3 G = build_amplification(p, weights).G;
    const Mat3 exact = exact_propagator(p.dt_f, nu * p.k_dx, nu * p.l_dy);
    return frobenius_norm(exact - G);
}

double c2_integral(const FBWeights& weights, const LinearWaveParams& template_params, int intervals) {
    require_zero_mean_flow(template_params, "C2");
    return simpson([&](double nu) { return c2_integrand(weights, template_params, nu); }, 0.0,
                   std::numbers::pi / 6.0, intervals);
}

double cost_c2(const FBWeights& weights, const LinearWaveParams& template_params, double tol, int intervals) {
    require_zero_mean_flow(template_params, "C2");
    return cost_c1(weights, template_params, tol) + c2_integral(weights, template_params, intervals);
}

namespace {

// 1D wave system eta_t = -i c k u, u_t = -i c k eta, one step scaled to dt = 1.
struct WaveModel1D {
    using Momentum = cplx;
    using Thickness = cplx;
    double ktilde_nu;

    cplx momentum_tendency(const cplx&, const cplx& eta) const { return -I * ktilde_nu * eta; }
    cplx thickness_tendency(const cplx& u, const cplx&) const { return -I * ktilde_nu * u; }
};

} // namespace

Mat2 amp_1d(double ktilde_nu, const FBWeights& weights) {
    if (!(ktilde_nu >= 0.0) || !std::isfinite(ktilde_nu)) throw DomainError("amp_1d: K~nu must be finite and >= 0");
    const WaveModel1D model{ktilde_nu};
    const SchemeSpec scheme = SchemeSpec::fbrk32(weights);
    Mat2 m;
    for (std::size_t j = 0; j < 2; ++j) {
        // State ordering (eta, u).
        const SplitState<WaveModel1D> s{j == 1 ? cplx{1.0} : cplx{}, j == 0 ? cplx{1.0} : cplx{}};
        const auto next = advance(model, s, scheme, 1.0);
        m(0, j) = next.h;
        m(1, j) = next.u;
    }
    return m;
}

std::vector<DispersionSample> dispersion_curve(const FBWeights& weights, int n_samples) {
    if (n_samples < 2) throw DomainError("dispersion_curve: need at least two samples");
    std::vector<DispersionSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int j = 0; j < n_samples; ++j) {
        const double x = std::numbers::pi * j / (n_samples - 1);
        Vec2 lam = eigenvalues(amp_1d(x, weights));
        if (out.empty()) {
            if (lam[0].imag() < lam[1].imag()) std::swap(lam[0], lam[1]);
        } else {
            // Predict each track by linear extrapolation and keep the closer pairing.
            const DispersionSample& prev = out.back();
            cplx guess1 = prev.lambda1;
            cplx guess2 = prev.lambda2;
            if (out.size() >= 2) {
                const DispersionSample& before = out[out.size() - 2];
                guess1 = 2.0 * prev.lambda1 - before.lambda1;
                guess2 = 2.0 * prev.lambda2 - before.lambda2;
            }
            const double keep = std::abs(lam[0] - guess1) + std::abs(lam[1] - guess2);
            const double swap = std::abs(lam[1] - guess1) + std::abs(lam[0] - guess2);
            if (swap < keep) std::swap(lam[0], lam[1]);
            if (out.size() == 1 && lam[0].imag() < lam[1].imag()) std::swap(lam[0], lam[1]);
        }
        out.push_back({x, lam[0], lam[1]});
    }
    return out;
}

double effective_cfl(double nu_max_value, double k_dx, int n_stages) {
    if (!(nu_max_value > 0.0) || !(k_dx > 0.0) || n_stages <= 0)
        throw DomainError("effective_cfl: inputs must be positive");
    return nu_max_value * k_dx / n_stages;
}

} // namespace fbrk
