#pragma once

// Three- and four-stage Runge-Kutta schemes for split systems
//   du/dt = Phi(u, h),  dh/dt = Psi(u, h).
// The same templates drive the Fourier-space amplification analysis and the
// grid solver, so both see identical stage sequences.

#include <concepts>
#include <string>
#include <string_view>
#include <utility>

namespace fbrk {

/// Forward-backward averaging weights of FB-RK(3,2).
struct FBWeights {
    double beta1 = 0.0;
    double beta2 = 0.0;
    double beta3 = 0.0;

    bool finite() const;
    friend bool operator==(const FBWeights&, const FBWeights&) = default;
};

/// Weights for which FB-RK(3,2) approximately reduces to RK3.
inline constexpr FBWeights kRK3LikeWeights{0.0, 2.0 / 3.0, 0.0};

enum class SchemeKind { FBRK32, RK3, SSPRK3, RK4 };

struct SchemeSpec {
    SchemeKind kind = SchemeKind::SSPRK3;
    FBWeights weights{};

    static SchemeSpec fbrk32(FBWeights w) { return {SchemeKind::FBRK32, w}; }
    static SchemeSpec rk3() { return {SchemeKind::RK3, {}}; }
    static SchemeSpec ssprk3() { return {SchemeKind::SSPRK3, {}}; }
    static SchemeSpec rk4() { return {SchemeKind::RK4, {}}; }

    int stages() const { return kind == SchemeKind::RK4 ? 4 : 3; }
    friend bool operator==(const SchemeSpec&, const SchemeSpec&) = default;
};

/// Parses `ssprk3 | rk3 | rk4 | fbrk32:<b1>,<b2>,<b3>`. Throws DomainError.
SchemeSpec parse_scheme(std::string_view text);

/// Inverse of parse_scheme (weights printed with enough digits to round-trip).
std::string to_string(const SchemeSpec& scheme);

template <class M>
concept SplitSystem = requires(const M& m, const typename M::Momentum& u,
                               const typename M::Thickness& h) {
    { m.momentum_tendency(u, h) } -> std::convertible_to<typename M::Momentum>;
    { m.thickness_tendency(u, h) } -> std::convertible_to<typename M::Thickness>;
};

template <SplitSystem M>
struct SplitState {
    typename M::Momentum u;
    typename M::Thickness h;
};

/// One step of size dt. Momentum and thickness types must support
/// `a + b`, `a - b` and `double * a`.
template <SplitSystem M>
SplitState<M> advance(const M& model, const SplitState<M>& s, const SchemeSpec& scheme, double dt) {
    using U = typename M::Momentum;
    using H = typename M::Thickness;
    const U& u0 = s.u;
    const H& h0 = s.h;

    switch (scheme.kind) {
    case SchemeKind::FBRK32: {
        const auto [b1, b2, b3] = scheme.weights;
        const H h1 = h0 + (dt / 3.0) * model.thickness_tendency(u0, h0);
        const H h_star = b1 * h1 + (1.0 - b1) * h0;
        const U u1 = u0 + (dt / 3.0) * model.momentum_tendency(u0, h_star);

        const H h2 = h0 + (dt / 2.0) * model.thickness_tendency(u1, h1);
        const H h_2star = b2 * h2 + (1.0 - b2) * h0;
        const U u2 = u0 + (dt / 2.0) * model.momentum_tendency(u1, h_2star);

        H h3 = h0 + dt * model.thickness_tendency(u2, h2);
        const H h_3star = b3 * h3 + (1.0 - 2.0 * b3) * h2 + b3 * h0;
        U u3 = u0 + dt * model.momentum_tendency(u2, h_3star);
        return {std::move(u3), std::move(h3)};
    }
    case SchemeKind::RK3: {
        const U u1 = u0 + (dt / 3.0) * model.momentum_tendency(u0, h0);
        const H h1 = h0 + (dt / 3.0) * model.thickness_tendency(u0, h0);
        const U u2 = u0 + (dt / 2.0) * model.momentum_tendency(u1, h1);
        const H h2 = h0 + (dt / 2.0) * model.thickness_tendency(u1, h1);
        U u3 = u0 + dt * model.momentum_tendency(u2, h2);
        H h3 = h0 + dt * model.thickness_tendency(u2, h2);
        return {std::move(u3), std::move(h3)};
    }
    case SchemeKind::SSPRK3: {
        const U u1 = u0 + dt * model.momentum_tendency(u0, h0);
        const H h1 = h0 + dt * model.thickness_tendency(u0, h0);
        const U u2 = 0.75 * u0 + 0.25 * (u1 + dt * model.momentum_tendency(u1, h1));
        const H h2 = 0.75 * h0 + 0.25 * (h1 + dt * model.thickness_tendency(u1, h1));
        U u3 = (1.0 / 3.0) * u0 + (2.0 / 3.0) * (u2 + dt * model.momentum_tendency(u2, h2));
        H h3 = (1.0 / 3.0) * h0 + (2.0 / 3.0) * (h2 + dt * model.thickness_tendency(u2, h2));
        return {std::move(u3), std::move(h3)};
    }
    case SchemeKind::RK4: {
        const U ku1 = model.momentum_tendency(u0, h0);
        const H kh1 = model.thickness_tendency(u0, h0);
        const U ua = u0 + (dt / 2.0) * ku1;
        const H ha = h0 + (dt / 2.0) * kh1;
        const U ku2 = model.momentum_tendency(ua, ha);
        const H kh2 = model.thickness_tendency(ua, ha);
        const U ub = u0 + (dt / 2.0) * ku2;
        const H hb = h0 + (dt / 2.0) * kh2;
        const U ku3 = model.momentum_tendency(ub, hb);
        const H kh3 = model.thickness_tendency(ub, hb);
        const U uc = u0 + dt * ku3;
        const H hc = h0 + dt * kh3;
        const U ku4 = model.momentum_tendency(uc, hc);
        const H kh4 = model.thickness_tendency(uc, hc);
        U u4 = u0 + (dt / 6.0) * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4);
        H h4 = h0 + (dt / 6.0) * (kh1 + 2.0 * kh2 + 2.0 * kh3 + kh4);
        return {std::move(u4), std::move(h4)};
    }
    }
    return s;
}

} // namespace fbrk
