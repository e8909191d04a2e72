#pragma once

// Von Neumann analysis of FB-RK(3,2) on the C-grid linearized shallow water
// equations: amplification systems, spectra, maximal Courant numbers, the
// C1/C2 cost functions and the 1D dispersion curves.

#include "fbrk/schemes.hpp"
#include "fbrk/small_matrix.hpp"

#include <functional>
#include <numbers>
#include <vector>

namespace fbrk {

/// Dimensionless parameters of one Fourier mode of the linearized system.
/// The Courant number is the same in x and y (square cells).
struct LinearWaveParams {
    double nu = 0.0;                    ///< c dt / dx
    double k_dx = std::numbers::pi;     ///< k dx, radians
    double l_dy = std::numbers::pi;     ///< l dy, radians
    double dt_f = 1e-2;                 ///< dt * f
    double U = 0.0;                     ///< mean flow / c, x component
    double V = 0.0;                     ///< mean flow / c, y component

    /// 2 sin(k dx / 2)
    double K() const;
    /// 2 sin(l dy / 2)
    double L() const;
    /// dt f cos(k dx / 2) cos(l dy / 2); the four-point averaged Coriolis factor.
    double phi() const;

    /// Throws DomainError on non-finite values or out-of-range wavenumbers.
    void validate() const;

    /// The optimization setting: grid-scale wave, dt f = 1e-2, and the
    /// Froude number split evenly as U = V = froude / sqrt(2).
    static LinearWaveParams grid_scale(double froude = 0.0);
};

/// Momentum part (u-hat, v-hat) of a Fourier state.
struct FourierVelocity {
    cplx u;
    cplx v;

    friend FourierVelocity operator+(FourierVelocity a, FourierVelocity b) { return {a.u + b.u, a.v + b.v}; }
    friend FourierVelocity operator-(FourierVelocity a, FourierVelocity b) { return {a.u - b.u, a.v - b.v}; }
    friend FourierVelocity operator*(double s, FourierVelocity a) { return {s * a.u, s * a.v}; }
};

/// Fourier symbol of the C-grid linearized equations, scaled so that one
/// time step is dt = 1 (all tendencies carry the factors nu and dt f).
struct FourierModel {
    using Momentum = FourierVelocity;
    using Thickness = cplx;

    LinearWaveParams params;

    FourierVelocity momentum_tendency(const FourierVelocity& w, const cplx& eta) const;
    cplx thickness_tendency(const FourierVelocity& w, const cplx& eta) const;
};

/// One-step affine map w -> G w + b over (u-hat, v-hat, eta-hat).
struct AmplificationSystem {
    Mat3 G;
    Vec3 b{};
};

struct SpectrumResult {
    Vec3 eigenvalues{};
    std::array<Vec3, 3> eigenvectors{};  ///< unit norm, eigenvectors[k] pairs with eigenvalues[k]
    double spectral_radius = 0.0;
};

/// Applies the stages of `scheme` once to the Fourier state w = (u, v, eta).
Vec3 apply_stages(const LinearWaveParams& params, const SchemeSpec& scheme, const Vec3& w);

/// Builds G and b by evaluating the stages on the zero state and on the three unit states.
AmplificationSystem build_amplification(const LinearWaveParams& params, const SchemeSpec& scheme);
AmplificationSystem build_amplification(const LinearWaveParams& params, const FBWeights& weights);

SpectrumResult spectrum(const Mat3& G);
inline SpectrumResult spectrum(const AmplificationSystem& sys) { return spectrum(sys.G); }

/// Largest modulus among the eigenvalues of G (no eigenvectors).
double spectral_radius(const Mat3& G);

/// Stability slack on |lambda| <= 1.
inline constexpr double kStabilitySlack = 1e-10;

struct NuMaxOptions {
    double tol = 1e-3;          ///< bisection tolerance on nu
    double scan_step = 0.01;    ///< coarse scan resolution
    double scan_max = 4.0;      ///< upper end of the scan
    double slack = kStabilitySlack;
};

struct NuMaxResult {
    double nu_max = 0.0;
    bool unstable_everywhere = false;  ///< first scanned nu already unstable; nu_max = 0
    bool capped = false;               ///< stable over the whole scan; nu_max = scan_max
};

/// Largest nu such that the spectral radius stays within 1 + slack for every
/// scanned nu' <= nu; coarse scan then bisection on the first unstable bracket.
/// template_params.nu is ignored.
NuMaxResult nu_max(const SchemeSpec& scheme, const LinearWaveParams& template_params,
                   const NuMaxOptions& options = {});
NuMaxResult nu_max(const FBWeights& weights, const LinearWaveParams& template_params, double tol = 1e-3);

/// exp(A dt) for the continuous generator
///   A = [[0, f, -i c k], [-f, 0, -i c l], [-i c k, -i c l, 0]]
/// given the products f dt, c k dt and c l dt.
Mat3 exact_propagator(double f_dt, double ck_dt, double cl_dt);

/// exp(A dt) for physical inputs. Defined only for zero mean flow in `params`.
Mat3 analytic_G(const LinearWaveParams& params, double dt, double c, double k, double l, double f);

/// Cost assigned to weights that are unstable at every scanned Courant number.
inline constexpr double kUnstableCost = 1e6;

/// 1 / nu_max, or kUnstableCost when nu_max = 0.
double cost_c1(const FBWeights& weights, const LinearWaveParams& template_params, double tol = 1e-3);

/// Composite Simpson rule on [a, b]; `intervals` must be even and >= 2.
double simpson(const std::function<double(double)>& f, double a, double b, int intervals);

/// || exp(A dt(nu)) - G(nu) ||_F at one Courant number. Both operators use
/// dt f = nu * template_params.dt_f, i.e. template dt_f is read as f dx / c.
double c2_integrand(const FBWeights& weights, const LinearWaveParams& template_params, double nu);

/// Composite Simpson approximation of the integral over nu in [0, pi/6] of
/// || exp(A dt(nu)) - G(nu) ||_F, with c k dt = nu k dx and c l dt = nu l dy.
/// Zero mean flow only.
double c2_integral(const FBWeights& weights, const LinearWaveParams& template_params, int intervals = 48);

/// cost_c1 + c2_integral.
double cost_c2(const FBWeights& weights, const LinearWaveParams& template_params, double tol = 1e-3,
               int intervals = 48);

/// One-step map over (eta-hat, u-hat) of FB-RK(3,2) on the 1D wave system
/// with K~nu = c k dt.
Mat2 amp_1d(double ktilde_nu, const FBWeights& weights);

struct DispersionSample {
    double ktilde_nu = 0.0;
    cplx lambda1;
    cplx lambda2;
};

/// Eigenvalues of amp_1d at n_samples points evenly spaced on [0, pi], with
/// the two tracks kept continuous by nearest-neighbour matching.
std::vector<DispersionSample> dispersion_curve(const FBWeights& weights, int n_samples);

/// (nu_max * k dx) / n_stages.
double effective_cfl(double nu_max_value, double k_dx, int n_stages);

} // namespace fbrk
