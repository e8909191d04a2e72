#include "fbrk/experiment_harness.hpp"

#include "fbrk/errors.hpp"
#include "fbrk/small_matrix.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

namespace fbrk {

namespace {

constexpr double pi = std::numbers::pi;

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class Body>
void parallel_for(int n, int threads, Body&& body) {
    threads = std::clamp(threads, 1, std::max(n, 1));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    auto worker = [&] {
        for (int i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

double periodic_offset(double x, double centre, double period) {
    double d = std::fmod(x - centre, period);
    if (d > 0.5 * period) d -= period;
    if (d < -0.5 * period) d += period;
    return d;
}

void finish_case(Case& c) {
    c.perturbation_amplitude = (c.initial.h - Field(c.grid, c.config.H)).max_abs();
    c.initial_speed = std::max(c.initial.u.max_abs(), c.initial.v.max_abs());
}

int steps_for(double duration, double dt) {
    const double n = std::round(duration / dt);
    if (n < 1 || std::abs(n * dt - duration) > 1e-9 * duration)
        throw DomainError("time step must divide the run length");
    return static_cast<int>(n);
}

SWEState integrate(const Case& c, const SchemeSpec& scheme, double dt, int steps) {
    SWEState s = c.initial;
    for (int k = 0; k < steps; ++k) {
        auto r = step(s, scheme, dt, c.config, c.grid);
        if (r.unstable) {
            std::ostringstream msg;
            msg << "run became unstable at dt = " << dt << " (" << to_string(scheme) << ")";
            throw InstabilityError(msg.str());
        }
        s = std::move(r.state);
    }
    return s;
}

double rms(const Field& a) {
    double s = 0.0;
    for (double x : a.data()) s += x * x;
    return std::sqrt(s / static_cast<double>(a.size()));
}

double rms_velocity(const SWEState& a, const SWEState& b) {
    const double eu = rms(a.u - b.u), ev = rms(a.v - b.v);
    return std::sqrt(0.5 * (eu * eu + ev * ev));
}

} // namespace

Case make_case(const std::string& id, int n) {
    if (n < 4) throw DomainError("make_case: grid size must be >= 4");
    Case c;
    c.id = id;
    if (id == "qlw") {
        // Unit bump on a 500 m layer over [0, 2 pi)^2 scaled by R = 1000 km.
        const double R = 1e6;
        c.grid = Grid{n, n, 2.0 * pi * R / n, 2.0 * pi * R / n};
        c.config.H = 500.0;
        c.config.f = 1e-4;
        c.config.momentum_advection = false;
        c.initial = SWEState::rest(c.grid, c.config.H);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x = (i + 0.5) * 2.0 * pi / n;
                const double y = periodic_offset((j + 0.5) * 2.0 * pi / n, 0.0, 2.0 * pi);
                c.initial.h(i, j) += std::exp(-100.0 * (x - pi) * (x - pi) - 100.0 * y * y);
            }
        c.duration = 2.0 * 86400.0;
    } else if (id == "jet") {
        // Zero-mean double jet, balanced, with a small bump on the northern jet.
        const double dx = 1e5;
        c.grid = Grid{n, n, dx, dx};
        c.config.H = 500.0;
        c.config.f = 1e-4;
        c.config.momentum_advection = true;
        const double ly = n * dx, lx = n * dx, w = ly / 20.0, u0 = 10.0;
        Field u(c.grid);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double y = (j + 0.5) * dx;
                const double a = 1.0 / std::cosh((y - 0.25 * ly) / w);
                const double b = 1.0 / std::cosh((y - 0.75 * ly) / w);
                u(i, j) = u0 * (a * a - b * b);
            }
        c.initial = balanced_ic(u, Field(c.grid), c.config, c.grid).state;
        const double sigma = 3.0 * dx;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double ox = periodic_offset((i + 0.5) * dx, 0.5 * lx, lx);
                const double oy = periodic_offset((j + 0.5) * dx, 0.75 * ly, ly);
                c.initial.h(i, j) += 2.0 * std::exp(-(ox * ox + oy * oy) / (2.0 * sigma * sigma));
            }
        c.duration = 2.0 * 86400.0;
    } else if (id == "rest") {
        c.grid = Grid{n, n, 1e5, 1e5};
        c.config.H = 500.0;
        c.config.f = 1e-4;
        c.initial = SWEState::rest(c.grid, c.config.H);
        c.duration = 86400.0;
    } else {
        throw DomainError("unknown case '" + id + "' (expected qlw, jet or rest)");
    }
    finish_case(c);
    return c;
}

double courant(const Case& c, double dt) { return c.config.wave_speed() * dt / std::min(c.grid.dx, c.grid.dy); }

bool run_is_stable(const Case& c, const SchemeSpec& scheme, double dt, double duration, const StabilityLimits& limits) {
    if (!(dt > 0.0) || !(duration > 0.0)) throw DomainError("run_is_stable: dt and duration must be positive");
    const double amp = c.perturbation_amplitude;
    const double speed =
        c.initial_speed > 0.0 ? c.initial_speed : c.config.wave_speed() * amp / c.config.H;
    const double h_cap = limits.h_factor * amp;
    const double u_cap = limits.speed_factor * speed;
    const Field rest_h(c.grid, c.config.H);
    const int steps = static_cast<int>(std::ceil(duration / dt - 1e-12));
    SWEState s = c.initial;
    for (int k = 0; k < steps; ++k) {
        auto r = step(s, scheme, dt, c.config, c.grid);
        if (r.unstable) return false;
        s = std::move(r.state);
        if ((s.h - rest_h).max_abs() > h_cap) return false;
        if (std::max(s.u.max_abs(), s.v.max_abs()) > u_cap) return false;
    }
    return true;
}

CFLReport max_stable_dt(const Case& c, const SchemeSpec& scheme, double duration, double dt_lo, double dt_hi,
                        double rel_tol, const StabilityLimits& limits) {
    if (!(dt_lo > 0.0) || !(dt_lo < dt_hi)) throw DomainError("max_stable_dt: need 0 < dt_lo < dt_hi");
    if (!(rel_tol > 0.0)) throw DomainError("max_stable_dt: rel_tol must be positive");
    CFLReport r;
    r.case_id = c.id;
    r.scheme = scheme;
    r.duration = duration;
    ++r.probes;
    if (!run_is_stable(c, scheme, dt_lo, duration, limits)) {
        std::ostringstream msg;
        msg << "max_stable_dt: lower bracket dt = " << dt_lo << " is already unstable";
        throw InstabilityError(msg.str());
    }
    ++r.probes;
    if (run_is_stable(c, scheme, dt_hi, duration, limits)) {
        r.dt_max = dt_hi;
        r.open_upper_bound = true;
        return r;
    }
    double lo = dt_lo, hi = dt_hi;
    while (hi - lo > rel_tol * lo) {
        const double mid = 0.5 * (lo + hi);
        ++r.probes;
        (run_is_stable(c, scheme, mid, duration, limits) ? lo : hi) = mid;
    }
    r.dt_max = lo;
    return r;
}

CFLReport max_stable_dt(const Case& c, const SchemeSpec& scheme, double rel_tol) {
    const double unit = std::min(c.grid.dx, c.grid.dy) / c.config.wave_speed();
    return max_stable_dt(c, scheme, c.duration, 0.1 * unit, 4.0 * unit, rel_tol);
}

CFLReport cfl_compare(const Case& c, const SchemeSpec& scheme, const SchemeSpec& reference, double rel_tol,
                      int threads) {
    CFLReport results[2];
    const SchemeSpec schemes[2] = {scheme, reference};
    parallel_for(2, threads, [&](int i) { results[i] = max_stable_dt(c, schemes[i], rel_tol); });
    CFLReport r = results[0];
    r.reference = to_string(reference);
    r.ratio_vs_reference = r.dt_max / results[1].dt_max;
    return r;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need two or more matching points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

ConvergenceReport convergence_study(const Case& c, const SchemeSpec& scheme, const std::vector<double>& dts,
                                    double reference_dt, double duration, int threads) {
    if (dts.size() < 2) throw DomainError("convergence_study: need at least two time steps");
    for (std::size_t i = 1; i < dts.size(); ++i)
        if (!(dts[i] < dts[i - 1])) throw DomainError("convergence_study: dt list must be strictly decreasing");
    if (!(reference_dt > 0.0) || reference_dt > dts.back() / 8.0 * (1.0 + 1e-12))
        throw DomainError("convergence_study: reference dt must be <= min(dt) / 8");

    ConvergenceReport r;
    r.case_id = c.id;
    r.scheme = scheme;
    r.duration = duration;
    r.reference_dt = reference_dt;
    r.dts = dts;

    const int n = static_cast<int>(dts.size());
    std::vector<SWEState> finals(static_cast<std::size_t>(n + 2));
    for (double dt : dts) steps_for(duration, dt);
    const int ref_steps = steps_for(duration, reference_dt);
    parallel_for(n + 2, threads, [&](int i) {
        if (i < n) finals[i] = integrate(c, scheme, dts[i], steps_for(duration, dts[i]));
        else if (i == n) finals[i] = integrate(c, SchemeSpec::rk4(), reference_dt, ref_steps);
        else finals[i] = integrate(c, SchemeSpec::rk4(), 0.5 * reference_dt, 2 * ref_steps);
    });

    const SWEState& ref = finals[n];
    for (int i = 0; i < n; ++i) {
        r.errors_h.push_back(rms(finals[i].h - ref.h));
        r.errors_u.push_back(rms_velocity(finals[i], ref));
        if (!(r.errors_h.back() > 0.0) || !(r.errors_u.back() > 0.0))
            throw NumericalError("convergence_study: zero error against the reference");
    }
    r.slope_h = loglog_slope(r.dts, r.errors_h);
    r.slope_u = loglog_slope(r.dts, r.errors_u);
    r.reference_self_difference = std::max(rms(finals[n + 1].h - ref.h), rms_velocity(finals[n + 1], ref));
    return r;
}

namespace {

struct Wave1D {
    using Momentum = cplx;
    using Thickness = cplx;
    double ck;

    cplx momentum_tendency(const cplx&, const cplx& eta) const { return cplx(0.0, -ck) * eta; }
    cplx thickness_tendency(const cplx& u, const cplx&) const { return cplx(0.0, -ck) * u; }
};

} // namespace

LteReport lte_slope(const SchemeSpec& scheme, const std::vector<double>& dts) {
    if (dts.size() < 2) throw DomainError("lte_slope: need at least two time steps");
    LteReport r;
    r.dts = dts;
    const Wave1D model{1.0};
    const SplitState<Wave1D> s0{cplx(0.5, 0.0), cplx(1.0, 0.0)};
    for (double dt : dts) {
        if (!(dt > 0.0)) throw DomainError("lte_slope: time steps must be positive");
        const auto s1 = advance(model, s0, scheme, dt);
        // exp(dt A) with A = -i [[0, 1], [1, 0]].
        const cplx c = std::cos(dt), is = cplx(0.0, -std::sin(dt));
        const cplx eta = c * s0.h + is * s0.u;
        const cplx u = is * s0.h + c * s0.u;
        r.thickness_errors.push_back(std::abs(s1.h - eta));
        r.momentum_errors.push_back(std::abs(s1.u - u));
        r.errors.push_back(std::hypot(r.thickness_errors.back(), r.momentum_errors.back()));
    }
    r.slope = loglog_slope(r.dts, r.errors);
    r.thickness_slope = loglog_slope(r.dts, r.thickness_errors);
    r.momentum_slope = loglog_slope(r.dts, r.momentum_errors);
    return r;
}

SolutionDiff solution_diff(const Case& c, const SchemeSpec& a, double dt_a, const SchemeSpec& b, double dt_b,
                           double t_final) {
    const SWEState sa = integrate(c, a, dt_a, steps_for(t_final, dt_a));
    const SWEState sb = integrate(c, b, dt_b, steps_for(t_final, dt_b));
    const Field za = vorticity(sa.u, sa.v, c.grid), zb = vorticity(sb.u, sb.v, c.grid);
    SolutionDiff d;
    for (std::size_t k = 0; k < za.size(); ++k) d.max_abs_vorticity_diff = std::max(d.max_abs_vorticity_diff, std::abs(za[k] - zb[k]));
    d.l2_h_diff = rms(sa.h - sb.h);
    d.max_abs_vorticity = std::max(za.max_abs(), zb.max_abs());
    return d;
}

nlohmann::ordered_json to_json(const CFLReport& r) {
    nlohmann::ordered_json j;
    j["case"] = r.case_id;
    j["scheme"] = to_string(r.scheme);
    j["duration"] = r.duration;
    j["dt_max"] = r.dt_max;
    j["open_upper_bound"] = r.open_upper_bound;
    j["probes"] = r.probes;
    if (!r.reference.empty()) {
        j["reference"] = r.reference;
        j["ratio"] = r.ratio_vs_reference;
    }
    return j;
}

nlohmann::ordered_json to_json(const ConvergenceReport& r) {
    return {{"case", r.case_id},
            {"scheme", to_string(r.scheme)},
            {"duration", r.duration},
            {"reference_dt", r.reference_dt},
            {"dts", r.dts},
            {"errors_h", r.errors_h},
            {"errors_u", r.errors_u},
            {"slope_h", r.slope_h},
            {"slope_u", r.slope_u},
            {"reference_self_difference", r.reference_self_difference}};
}

nlohmann::ordered_json to_json(const LteReport& r) {
    return {{"dts", r.dts},
            {"errors", r.errors},
            {"slope", r.slope},
            {"thickness_slope", r.thickness_slope},
            {"momentum_slope", r.momentum_slope}};
}

nlohmann::ordered_json to_json(const SolutionDiff& r) {
    return {{"max_abs_vorticity_diff", r.max_abs_vorticity_diff},
            {"l2_h_diff", r.l2_h_diff},
            {"max_abs_vorticity", r.max_abs_vorticity}};
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

} // namespace

std::string cfl_csv(const std::vector<CFLReport>& reports) {
    std::ostringstream out;
    out.precision(17);
    out << "x,series,value\n";
    for (const auto& r : reports) {
        out << r.case_id << ',' << csv_field(to_string(r.scheme) + " dt_max") << ',' << r.dt_max << '\n';
        if (!r.reference.empty())
            out << r.case_id << ',' << csv_field(to_string(r.scheme) + " ratio") << ',' << r.ratio_vs_reference << '\n';
    }
    return out.str();
}

std::string convergence_csv(const ConvergenceReport& r) {
    std::ostringstream out;
    out.precision(17);
    out << "x,series,value\n";
    for (std::size_t i = 0; i < r.dts.size(); ++i) {
        out << r.dts[i] << ",error_h," << r.errors_h[i] << '\n';
        out << r.dts[i] << ",error_u," << r.errors_u[i] << '\n';
    }
    return out.str();
}

} // namespace fbrk
