#include "fbrk/weight_optimizer.hpp"

#include "fbrk/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <tuple>

namespace fbrk {

CostKind parse_cost_kind(const std::string& text) {
    if (text == "C1" || text == "c1") return CostKind::C1;
    if (text == "C2" || text == "c2") return CostKind::C2;
    throw DomainError("unknown cost kind '" + text + "' (expected C1 or C2)");
}

std::string to_string(CostKind kind) { return kind == CostKind::C1 ? "C1" : "C2"; }

void CostSpec::validate() const {
    if (!std::isfinite(froude) || froude < 0.0) throw DomainError("froude must be finite and >= 0");
    if (kind == CostKind::C2 && froude != 0.0) throw DomainError("cost C2 requires zero mean flow (froude = 0)");
    LinearWaveParams p = template_params();
    p.validate();
}

LinearWaveParams CostSpec::template_params() const {
    LinearWaveParams p = base;
    p.U = froude / std::numbers::sqrt2;
    p.V = froude / std::numbers::sqrt2;
    p.nu = 0.0;
    return p;
}

double evaluate_cost(const CostSpec& spec, const FBWeights& w, double tol) {
    const LinearWaveParams p = spec.template_params();
    return spec.kind == CostKind::C1 ? cost_c1(w, p, tol) : cost_c2(w, p, tol);
}

namespace {

using Point = std::array<double, 3>;

FBWeights to_weights(const Point& x) { return {x[0], x[1], x[2]}; }

struct Candidate {
    Point x{};
    double f = 0.0;
};

bool better(const Candidate& a, const Candidate& b) {
    if (a.f != b.f) return a.f < b.f;
    return a.x < b.x;
}

// Evaluation counter with a hard cap.
class Objective {
public:
    Objective(const CostSpec& spec, const OptimizerOptions& opt, double tol, int budget)
        : spec_(spec), opt_(opt), tol_(tol), budget_(budget) {}

    bool exhausted() const { return used_ >= budget_; }
    int used() const { return used_; }

    Point project(Point x) const {
        for (std::size_t i = 0; i < 3; ++i) x[i] = std::clamp(x[i], opt_.lower[i], opt_.upper[i]);
        return x;
    }

    Candidate operator()(const Point& raw) {
        const Point x = project(raw);
        ++used_;
        return {x, evaluate_cost(spec_, to_weights(x), tol_)};
    }

private:
    const CostSpec& spec_;
    const OptimizerOptions& opt_;
    double tol_;
    int budget_;
    int used_ = 0;
};

struct StartResult {
    Candidate best;
    std::vector<TraceEntry> trace;
    int evaluations = 0;
};

double diameter(const std::array<Candidate, 4>& s) {
    double d = 0.0;
    for (std::size_t i = 1; i < 4; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < 3; ++k) sq += (s[i].x[k] - s[0].x[k]) * (s[i].x[k] - s[0].x[k]);
        d = std::max(d, std::sqrt(sq));
    }
    return d;
}

Point affine(const Point& c, const Point& x, double t) {
    // c + t (x - c)
    return {c[0] + t * (x[0] - c[0]), c[1] + t * (x[1] - c[1]), c[2] + t * (x[2] - c[2])};
}

template <class Note>
void run_simplex(Objective& obj, std::array<Candidate, 4>& s, const OptimizerOptions& opt, Note&& note) {
    constexpr double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;
    while (!obj.exhausted()) {
        std::sort(s.begin(), s.end(), better);
        if (diameter(s) < opt.simplex_tol) break;

        Point c{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t k = 0; k < 3; ++k) c[k] += s[i].x[k] / 3.0;

        const Candidate r = obj(affine(c, s[3].x, -reflect));
        note(r);
        if (better(r, s[0])) {
            if (obj.exhausted()) {
                s[3] = r;
                break;
            }
            const Candidate e = obj(affine(c, r.x, expand));
            note(e);
            s[3] = better(e, r) ? e : r;
            continue;
        }
        if (better(r, s[2])) {
            s[3] = r;
            continue;
        }
        if (obj.exhausted()) break;
        const bool outside = better(r, s[3]);
        const Candidate k = outside ? obj(affine(c, r.x, contract)) : obj(affine(c, s[3].x, contract));
        note(k);
        if (outside ? !better(r, k) : better(k, s[3])) {
            s[3] = k;
            continue;
        }
        for (std::size_t i = 1; i < 4 && !obj.exhausted(); ++i) {
            s[i] = obj(affine(s[0].x, s[i].x, shrink));
            note(s[i]);
        }
    }
}

StartResult nelder_mead(const CostSpec& spec, const OptimizerOptions& opt, const Candidate& start,
                        int budget, std::uint64_t seed, int index) {
    Objective obj(spec, opt, opt.search_tol, budget);
    StartResult out;
    out.best = start;

    auto note = [&](const Candidate& c) {
        if (better(c, out.best)) {
            out.best = c;
            out.trace.push_back({to_weights(c.x), c.f});
        }
    };

    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Restart from the incumbent with a fresh simplex until a restart stops paying off.
    while (!obj.exhausted()) {
        const Candidate before = out.best;
        std::array<Candidate, 4> s;
        s[0] = out.best;
        for (std::size_t i = 0; i < 3 && !obj.exhausted(); ++i) {
            const double width = opt.upper[i] - opt.lower[i];
            double step = (0.05 + 0.1 * unit(rng)) * width;
            if (unit(rng) < 0.5) step = -step;
            Point x = s[0].x;
            if (x[i] + step > opt.upper[i] || x[i] + step < opt.lower[i]) step = -step;
            x[i] += step;
            s[i + 1] = obj(x);
            note(s[i + 1]);
        }
        if (obj.exhausted()) break;
        run_simplex(obj, s, opt, note);
        if (!better(out.best, before)) break;
    }
    out.evaluations = obj.used();
    return out;
}

} // namespace

OptimizationReport optimize(const CostSpec& spec, int budget, std::uint64_t seed, const OptimizerOptions& opt) {
    spec.validate();
    if (budget < 100) throw DomainError("optimize: budget must be >= 100");
    for (std::size_t i = 0; i < 3; ++i)
        if (!(opt.lower[i] <= opt.upper[i]) || !std::isfinite(opt.lower[i]) || !std::isfinite(opt.upper[i]))
            throw DomainError("optimize: invalid search box");
    if (opt.grid_points < 2 || opt.keep < 1 || opt.threads < 1 || !(opt.search_tol > 0.0) ||
        !(opt.final_tol > 0.0) || !(opt.polish_step > 0.0))
        throw DomainError("optimize: invalid options");

    OptimizationReport rep;
    rep.spec = spec;

    // Grid seeding, shrunk if the budget cannot afford it.
    int n = opt.grid_points;
    while (n > 2 && n * n * n > budget / 2) --n;
    Objective seeding(spec, opt, opt.search_tol, n * n * n);
    std::vector<Candidate> seeds;
    Candidate best_seed{};
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const std::array<int, 3> idx{a, b, c};
                Point x;
                for (std::size_t i = 0; i < 3; ++i)
                    x[i] = opt.lower[i] + (opt.upper[i] - opt.lower[i]) * idx[i] / (n - 1);
                const Candidate cand = seeding(x);
                if (seeds.empty() || better(cand, best_seed)) {
                    best_seed = cand;
                    rep.trace.push_back({to_weights(cand.x), cand.f});
                }
                seeds.push_back(cand);
            }
    rep.evaluations = seeding.used();
    std::stable_sort(seeds.begin(), seeds.end(), better);
    seeds.erase(std::unique(seeds.begin(), seeds.end(), [](const Candidate& a, const Candidate& b) { return a.x == b.x; }),
                seeds.end());
    const int starts = std::min<int>(opt.keep, static_cast<int>(seeds.size()));
    rep.starts = starts;

    const int reserve = std::min(budget / 5, starts + 1 + 60);
    const int per_start = std::max(0, (budget - rep.evaluations - reserve) / starts);

    std::vector<StartResult> results(static_cast<std::size_t>(starts));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < starts; i = next++)
            results[i] = nelder_mead(spec, opt, seeds[i], per_start, seed, i);
    };
    const int nthreads = std::min(opt.threads, starts);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    double last = rep.trace.back().cost;
    for (const auto& r : results) {
        rep.evaluations += r.evaluations;
        for (const auto& e : r.trace)
            if (e.cost < last) {
                rep.trace.push_back(e);
                last = e.cost;
            }
    }

    // Re-rank the best seed and every start's result at the final tolerance.
    const int remaining = budget - rep.evaluations;
    Objective fine(spec, opt, opt.final_tol, std::max(remaining, starts + 1));
    Candidate best = fine(best_seed.x);
    for (const auto& r : results) {
        if (r.best.x == best_seed.x) continue;
        const Candidate c = fine(r.best.x);
        if (better(c, best)) best = c;
    }

    // Compass polish: stop once no +-step neighbour improves.
    bool moved = true;
    while (moved && !fine.exhausted()) {
        moved = false;
        Candidate round_best = best;
        for (std::size_t i = 0; i < 3 && !fine.exhausted(); ++i)
            for (double sign : {1.0, -1.0}) {
                if (fine.exhausted()) break;
                Point x = best.x;
                x[i] += sign * opt.polish_step;
                if (fine.project(x) == best.x) continue;
                const Candidate c = fine(x);
                if (c.f < round_best.f) round_best = c;
            }
        if (round_best.f < best.f) {
            best = round_best;
            moved = true;
            if (best.f < last) {
                rep.trace.push_back({to_weights(best.x), best.f});
                last = best.f;
            }
        }
    }
    rep.evaluations += fine.used();

    rep.weights = to_weights(best.x);
    rep.cost = best.f;
    rep.all_unstable = best.f >= kUnstableCost;
    if (!rep.all_unstable) {
        const NuMaxResult nm = nu_max(rep.weights, spec.template_params(), opt.final_tol);
        rep.nu_max = nm.unstable_everywhere ? 0.0 : nm.nu_max;
    }
    return rep;
}

const std::vector<PublishedOptimum>& published_optima() {
    static const std::vector<PublishedOptimum> rows{
        {"C1 |U|=0", CostKind::C1, 0.0, {0.500, 0.500, 0.344}, 1.767, 0.0, false},
        {"C2 |U|=0", CostKind::C2, 0.0, {0.516, 0.532, 0.331}, 1.804, 0.0, false},
        {"C1 |U|=0.05", CostKind::C1, 0.05, {0.531, 0.531, 0.313}, 1.319, 0.0, false},
        {"C1 |U|=0.15", CostKind::C1, 0.15, {0.359, 0.578, 0.234}, 1.025, 0.0, false},
        {"C1 |U|=0.25", CostKind::C1, 0.25, {0.656, 0.938, 0.188}, 0.853, 0.0, false},
    };
    return rows;
}

std::vector<PublishedOptimum> check_published_optima(double tol) {
    if (!(tol > 0.0)) throw DomainError("check_published_optima: tol must be positive");
    std::vector<PublishedOptimum> rows = published_optima();
    for (auto& row : rows) {
        row.achieved_nu_max = nu_max(row.weights, LinearWaveParams::grid_scale(row.froude), 1e-4).nu_max;
        row.pass = std::abs(row.achieved_nu_max - row.published_nu_max) <= tol;
    }
    return rows;
}

namespace {

nlohmann::ordered_json weights_json(const FBWeights& w) { return {w.beta1, w.beta2, w.beta3}; }

} // namespace

nlohmann::ordered_json to_json(const OptimizationReport& r) {
    nlohmann::ordered_json j;
    j["cost_kind"] = to_string(r.spec.kind);
    j["froude"] = r.spec.froude;
    j["weights"] = weights_json(r.weights);
    j["nu_max"] = r.nu_max;
    j["cost"] = r.cost;
    j["evaluations"] = r.evaluations;
    j["starts"] = r.starts;
    j["all_unstable"] = r.all_unstable;
    j["trace"] = nlohmann::ordered_json::array();
    for (const auto& e : r.trace) j["trace"].push_back({{"weights", weights_json(e.weights)}, {"cost", e.cost}});
    return j;
}

nlohmann::ordered_json to_json(const std::vector<PublishedOptimum>& rows) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        j.push_back({{"row", r.label},
                     {"cost_kind", to_string(r.kind)},
                     {"froude", r.froude},
                     {"weights", weights_json(r.weights)},
                     {"published_nu_max", r.published_nu_max},
                     {"achieved_nu_max", r.achieved_nu_max},
                     {"pass", r.pass}});
    return j;
}

} // namespace fbrk
