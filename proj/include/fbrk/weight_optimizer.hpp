#pragma once

// Multistart bounded Nelder-Mead search for FB weights maximizing nu_max
// (cost C1) or nu_max plus accuracy (cost C2).

#include "fbrk/schemes.hpp"
#include "fbrk/vn_core.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace fbrk {

enum class CostKind { C1, C2 };

CostKind parse_cost_kind(const std::string& text);
std::string to_string(CostKind kind);

struct CostSpec {
    CostKind kind = CostKind::C1;
    double froude = 0.0;
    LinearWaveParams base{};  ///< kdx, ldy, dt f; the mean flow is set from froude

    /// Throws DomainError: negative/non-finite froude, or C2 with froude != 0.
    void validate() const;
    /// base with U = V = froude / sqrt(2).
    LinearWaveParams template_params() const;
};

/// cost_c1 / cost_c2 for the given spec and nu_max tolerance.
double evaluate_cost(const CostSpec& spec, const FBWeights& w, double tol);

struct OptimizerOptions {
    std::array<double, 3> lower{0.0, 0.0, 0.0};
    std::array<double, 3> upper{1.0, 1.0, 1.0};
    int grid_points = 5;          ///< per axis
    int keep = 8;                 ///< seeds refined by Nelder-Mead
    double search_tol = 5e-3;     ///< nu_max tolerance inside the loop
    double final_tol = 1e-3;      ///< nu_max tolerance of the reported cost
    double simplex_tol = 1e-4;    ///< stop when the simplex diameter falls below this
    double polish_step = 1e-2;    ///< compass step of the final local check
    int threads = 1;
};

struct TraceEntry {
    FBWeights weights;
    double cost = 0.0;
};

struct OptimizationReport {
    CostSpec spec;
    FBWeights weights;
    double nu_max = 0.0;
    double cost = 0.0;
    int evaluations = 0;
    int starts = 0;
    bool all_unstable = false;
    std::vector<TraceEntry> trace;  ///< strictly decreasing costs
};

/// Deterministic for a given (spec, budget, seed, options). budget >= 100.
OptimizationReport optimize(const CostSpec& spec, int budget, std::uint64_t seed,
                            const OptimizerOptions& options = {});

struct PublishedOptimum {
    std::string label;
    CostKind kind = CostKind::C1;
    double froude = 0.0;
    FBWeights weights;
    double published_nu_max = 0.0;
    double achieved_nu_max = 0.0;
    bool pass = false;
};

/// The five published optima with their nu_max values.
const std::vector<PublishedOptimum>& published_optima();

/// Recomputes nu_max at each published weight triple and compares within tol.
std::vector<PublishedOptimum> check_published_optima(double tol = 0.02);

nlohmann::ordered_json to_json(const OptimizationReport& report);
nlohmann::ordered_json to_json(const std::vector<PublishedOptimum>& rows);

} // namespace fbrk
