#pragma once

// Desk-scale experiment protocol: planar test cases, maximal stable time
// step, temporal convergence, one-step error slopes and solution differences.

#include "fbrk/schemes.hpp"
#include "fbrk/swe_planar.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fbrk {

struct Case {
    std::string id;
    Grid grid;
    SWEConfig config;
    SWEState initial;
    double perturbation_amplitude = 0.0;  ///< max |h - H| at t = 0
    double initial_speed = 0.0;           ///< max |u|, |v| at t = 0
    double duration = 0.0;                ///< default run length (s)
};

/// "qlw", "jet" or "rest" on an n x n grid. Throws DomainError for unknown ids.
Case make_case(const std::string& id, int n = 64);

/// c dt / dx for the case.
double courant(const Case& c, double dt);

/// Thresholds of the stability predicate.
struct StabilityLimits {
    double h_factor = 50.0;
    double speed_factor = 50.0;
};

/// Runs ceil(duration / dt) steps and reports whether every state stayed
/// finite with max|h - H| <= h_factor * A and max speed <= speed_factor * S,
/// where A and S are the initial perturbation amplitude and speed (S falls
/// back to c A / H when the case starts at rest).
bool run_is_stable(const Case& c, const SchemeSpec& scheme, double dt, double duration,
                   const StabilityLimits& limits = {});

struct CFLReport {
    std::string case_id;
    SchemeSpec scheme;
    double duration = 0.0;
    double dt_max = 0.0;
    bool open_upper_bound = false;  ///< dt_hi itself was stable
    int probes = 0;
    double ratio_vs_reference = 0.0;  ///< filled by cfl_compare
    std::string reference;
};

/// Bisection on dt between a stable dt_lo and an unstable dt_hi until
/// (hi - lo) <= rel_tol * lo. Throws InstabilityError if dt_lo is unstable.
CFLReport max_stable_dt(const Case& c, const SchemeSpec& scheme, double duration, double dt_lo, double dt_hi,
                        double rel_tol = 0.01, const StabilityLimits& limits = {});

/// Default bracket [0.1, 4] dx / c.
CFLReport max_stable_dt(const Case& c, const SchemeSpec& scheme, double rel_tol = 0.01);

/// dt_max(scheme) / dt_max(reference) with default brackets. When
/// threads > 1 the two searches run concurrently.
CFLReport cfl_compare(const Case& c, const SchemeSpec& scheme, const SchemeSpec& reference, double rel_tol = 0.01,
                      int threads = 1);

struct ConvergenceReport {
    std::string case_id;
    SchemeSpec scheme;
    double duration = 0.0;
    double reference_dt = 0.0;
    std::vector<double> dts;        ///< strictly decreasing
    std::vector<double> errors_h;   ///< RMS over cells
    std::vector<double> errors_u;   ///< RMS of (u, v) over edges
    double slope_h = 0.0;
    double slope_u = 0.0;
    double reference_self_difference = 0.0;  ///< RK4(ref dt) vs RK4(ref dt / 2), max of h and u RMS
};

/// Integrates for `duration` with every dt (each must divide it) and with RK4
/// at reference_dt <= min(dt) / 8. Throws InstabilityError naming the dt on blow-up.
ConvergenceReport convergence_study(const Case& c, const SchemeSpec& scheme, const std::vector<double>& dts,
                                    double reference_dt, double duration, int threads = 1);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct LteReport {
    std::vector<double> dts;
    std::vector<double> errors;            ///< |one step - exact| over both components
    std::vector<double> thickness_errors;
    std::vector<double> momentum_errors;
    double slope = 0.0;
    double thickness_slope = 0.0;
    double momentum_slope = 0.0;
};

/// One-step error on the 1D linear wave system eta_t = -c u_x, u_t = -c eta_x
/// with a single mode (c = k = 1) against the exact propagator.
LteReport lte_slope(const SchemeSpec& scheme, const std::vector<double>& dts);

struct SolutionDiff {
    double max_abs_vorticity_diff = 0.0;
    double l2_h_diff = 0.0;             ///< RMS over cells
    double max_abs_vorticity = 0.0;     ///< larger of the two runs, for relative measures
};

/// Runs both configurations to t_final (each dt must divide it) and compares
/// vorticity and thickness on the shared grid.
SolutionDiff solution_diff(const Case& c, const SchemeSpec& a, double dt_a, const SchemeSpec& b, double dt_b,
                           double t_final);

nlohmann::ordered_json to_json(const CFLReport& r);
nlohmann::ordered_json to_json(const ConvergenceReport& r);
nlohmann::ordered_json to_json(const LteReport& r);
nlohmann::ordered_json to_json(const SolutionDiff& r);

/// Long-format plot tables with header "x,series,value".
std::string cfl_csv(const std::vector<CFLReport>& reports);
std::string convergence_csv(const ConvergenceReport& r);

} // namespace fbrk
