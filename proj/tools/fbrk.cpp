#include "fbrk/errors.hpp"
#include "fbrk/experiment_harness.hpp"
#include "fbrk/swe_planar.hpp"
#include "fbrk/vn_core.hpp"
#include "fbrk/weight_optimizer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace fbrk;
using ojson = nlohmann::ordered_json;

namespace {

// Writes to stdout for "" or "-", otherwise through a temporary file renamed into place.
void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content << std::flush;
        return;
    }
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.close();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw NumericalError("failed writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DomainError("cannot move output into '" + path + "'");
    }
}

std::string dump(const ojson& j) { return j.dump(2) + "\n"; }

int thread_cap(int requested) {
    int n = requested > 0 ? requested : 1;
    if (const char* env = std::getenv("FBRK_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || cap < 1) throw DomainError("FBRK_THREADS must be a positive integer");
        n = requested > 0 ? std::min<long>(requested, cap) : static_cast<int>(cap);
    }
    return n;
}

std::string json_scalar(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) {
        std::ostringstream s;
        s.precision(17);
        if (v.is_number_integer()) s << v.get<long long>();
        else s << v.get<double>();
        return s.str();
    }
    throw DomainError("config: unsupported value for key '" + key + "'");
}

// Fills options of `sub` not given on the command line from a JSON object
// whose keys are long option names ('_' and '-' interchangeable).
void apply_config(CLI::App* sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("config: cannot read '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw DomainError("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        CLI::Option* opt = name == "config" ? nullptr : sub->get_option_no_throw("--" + name);
        if (opt == nullptr) throw DomainError("config: unknown key '" + key + "' for " + sub->get_name());
        if (opt->count() > 0) continue;
        std::vector<std::string> inputs;
        if (value.is_array())
            for (const auto& v : value) inputs.push_back(json_scalar(v, key));
        else
            inputs.push_back(json_scalar(value, key));
        if (opt->get_type_size() == 0) {
            if (inputs.size() != 1 || (inputs[0] != "true" && inputs[0] != "false"))
                throw DomainError("config: key '" + key + "' expects a boolean");
            if (inputs[0] == "false") continue;
        }
        opt->add_result(inputs);
        opt->run_callback();
    }
}

FBWeights weights_from(const std::vector<double>& beta) {
    if (beta.size() != 3) throw DomainError("--beta needs exactly three values");
    return {beta[0], beta[1], beta[2]};
}

struct NumaxArgs {
    std::vector<double> beta;
    double froude = 0.0;
    double tol = 1e-4;
    bool json = false;
};

int cmd_numax(const NumaxArgs& a) {
    const FBWeights w = weights_from(a.beta);
    if (!(a.froude >= 0.0) || !std::isfinite(a.froude)) throw DomainError("--froude must be a finite value >= 0");
    const NuMaxResult r = nu_max(w, LinearWaveParams::grid_scale(a.froude), a.tol);
    if (a.json) {
        ojson j{{"weights", {w.beta1, w.beta2, w.beta3}},
                {"froude", a.froude},
                {"nu_max", r.nu_max},
                {"unstable_everywhere", r.unstable_everywhere},
                {"capped", r.capped}};
        std::cout << dump(j);
    } else {
        std::cout << r.nu_max << "\n";
        if (r.unstable_everywhere) std::cerr << "note: unstable at every probed Courant number\n";
    }
    return 0;
}

struct OptimizeArgs {
    std::string cost = "c1";
    double froude = 0.0;
    int budget = 5000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;
};

int cmd_optimize(const OptimizeArgs& a) {
    CostSpec spec;
    spec.kind = parse_cost_kind(a.cost);
    spec.froude = a.froude;
    spec.validate();
    OptimizerOptions opt;
    opt.threads = thread_cap(a.threads);
    emit(a.out, dump(to_json(optimize(spec, a.budget, a.seed, opt))));
    return 0;
}

struct SpectrumArgs {
    std::vector<double> beta;
    int samples = 256;
    std::string format = "wide";
    std::string out;
    std::string svg;
};

std::string spectrum_svg(const std::vector<DispersionSample>& curve) {
    constexpr double size = 400.0, scale = 160.0, mid = size / 2.0;
    std::ostringstream s;
    s.precision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
      << size << ' ' << size << "\">\n";
    s << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "  <circle cx=\"" << mid << "\" cy=\"" << mid << "\" r=\"" << scale
      << "\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    auto track = [&](auto pick, const char* colour, const char* id) {
        s << "  <polyline id=\"" << id << "\" fill=\"none\" stroke=\"" << colour << "\" points=\"";
        for (std::size_t k = 0; k < curve.size(); ++k) {
            const cplx z = pick(curve[k]);
            s << (k ? " " : "") << mid + scale * z.real() << ',' << mid - scale * z.imag();
        }
        s << "\"/>\n";
    };
    track([](const DispersionSample& d) { return d.lambda1; }, "steelblue", "lambda1");
    track([](const DispersionSample& d) { return d.lambda2; }, "firebrick", "lambda2");
    s << "</svg>\n";
    return s.str();
}

int cmd_spectrum(const SpectrumArgs& a) {
    const auto curve = dispersion_curve(weights_from(a.beta), a.samples);
    std::ostringstream csv;
    csv.precision(17);
    if (a.format == "wide") {
        csv << "ktilde_nu,lambda1_re,lambda1_im,lambda1_abs,lambda2_re,lambda2_im,lambda2_abs\n";
        for (const auto& d : curve)
            csv << d.ktilde_nu << ',' << d.lambda1.real() << ',' << d.lambda1.imag() << ',' << std::abs(d.lambda1) << ','
                << d.lambda2.real() << ',' << d.lambda2.imag() << ',' << std::abs(d.lambda2) << '\n';
    } else {
        csv << "x,series,value\n";
        for (const auto& d : curve) {
            const std::pair<const char*, double> cols[] = {
                {"lambda1_re", d.lambda1.real()}, {"lambda1_im", d.lambda1.imag()}, {"lambda1_abs", std::abs(d.lambda1)},
                {"lambda2_re", d.lambda2.real()}, {"lambda2_im", d.lambda2.imag()}, {"lambda2_abs", std::abs(d.lambda2)}};
            for (const auto& [name, v] : cols) csv << d.ktilde_nu << ',' << name << ',' << v << '\n';
        }
    }
    emit(a.out, csv.str());
    if (!a.svg.empty()) emit(a.svg, spectrum_svg(curve));
    return 0;
}

struct SimulateArgs {
    std::string case_id = "qlw";
    int n = 64;
    std::string scheme = "ssprk3";
    double dt = 0.0;
    int steps = 100;
    std::string snapshot;
    std::string format = "csv";
    std::string out;
};

ojson diagnostics_json(const Diagnostics& d) {
    return {{"total_mass", d.total_mass}, {"total_energy", d.total_energy}, {"max_abs_vorticity", d.max_abs_vorticity}};
}

int cmd_simulate(const SimulateArgs& a) {
    const Case c = make_case(a.case_id, a.n);
    const SchemeSpec scheme = parse_scheme(a.scheme);
    if (a.steps < 0) throw DomainError("--steps must be >= 0");
    const double dt = a.dt > 0.0 ? a.dt : 0.5 * std::min(c.grid.dx, c.grid.dy) / c.config.wave_speed();
    SWEState s = c.initial;
    for (int k = 0; k < a.steps; ++k) {
        auto r = step(s, scheme, dt, c.config, c.grid);
        if (r.unstable) {
            std::ostringstream msg;
            msg << "simulation became unstable at step " << k + 1 << " (dt = " << dt << ")";
            throw InstabilityError(msg.str());
        }
        s = std::move(r.state);
    }
    const double change = std::max({(s.h - c.initial.h).max_abs(), (s.u - c.initial.u).max_abs(),
                                    (s.v - c.initial.v).max_abs()});
    ojson j{{"case", c.id},
            {"scheme", to_string(scheme)},
            {"grid", planar_to_json(c.grid, c.config)},
            {"dt", dt},
            {"steps", a.steps},
            {"time", dt * a.steps},
            {"courant", courant(c, dt)},
            {"initial", diagnostics_json(diagnostics(c.initial, c.config, c.grid))},
            {"final", diagnostics_json(diagnostics(s, c.config, c.grid))},
            {"max_state_change", change}};
    if (!a.snapshot.empty()) {
        std::ostringstream snap;
        if (a.format == "csv") write_snapshot_csv(snap, s);
        else write_snapshot_binary(snap, s);
        emit(a.snapshot, snap.str());
        j["snapshot"] = a.snapshot;
    }
    emit(a.out, dump(j));
    return 0;
}

struct CflArgs {
    std::string case_id = "qlw";
    int n = 64;
    std::string scheme;
    std::string ref = "ssprk3";
    double rel_tol = 0.01;
    int threads = 0;
    std::string out;
    std::string csv;
};

int cmd_cfl(const CflArgs& a) {
    if (a.scheme.empty()) throw DomainError("--scheme is required");
    const Case c = make_case(a.case_id, a.n);
    const CFLReport r = cfl_compare(c, parse_scheme(a.scheme), parse_scheme(a.ref), a.rel_tol, thread_cap(a.threads));
    emit(a.out, dump(to_json(r)));
    if (!a.csv.empty()) emit(a.csv, cfl_csv({r}));
    return 0;
}

struct ConvergeArgs {
    std::string case_id = "qlw";
    int n = 64;
    std::string scheme;
    std::vector<double> dts{400.0, 200.0, 100.0, 50.0};
    double ref_dt = 6.25;
    double duration = 10800.0;
    int threads = 0;
    std::string out;
    std::string csv;
};

int cmd_converge(const ConvergeArgs& a) {
    if (a.scheme.empty()) throw DomainError("--scheme is required");
    const Case c = make_case(a.case_id, a.n);
    const auto r = convergence_study(c, parse_scheme(a.scheme), a.dts, a.ref_dt, a.duration, thread_cap(a.threads));
    emit(a.out, dump(to_json(r)));
    if (!a.csv.empty()) emit(a.csv, convergence_csv(r));
    return 0;
}

struct LteArgs {
    std::string scheme;
    std::vector<double> dts{0.2, 0.1, 0.05, 0.025, 0.0125};
    std::string out;
};

int cmd_lte(const LteArgs& a) {
    if (a.scheme.empty()) throw DomainError("--scheme is required");
    emit(a.out, dump(to_json(lte_slope(parse_scheme(a.scheme), a.dts))));
    return 0;
}

struct DiffArgs {
    std::string case_id = "jet";
    int n = 64;
    std::string scheme_a = "ssprk3";
    double dt_a = 960.0;
    std::string scheme_b = "fbrk32:0.531,0.531,0.313";
    double dt_b = 1920.0;
    double t_final = 0.0;
    std::string out;
};

int cmd_diff(const DiffArgs& a) {
    const Case c = make_case(a.case_id, a.n);
    const double t = a.t_final > 0.0 ? a.t_final : c.duration;
    const auto d = solution_diff(c, parse_scheme(a.scheme_a), a.dt_a, parse_scheme(a.scheme_b), a.dt_b, t);
    ojson j = to_json(d);
    j["relative_vorticity_diff"] = d.max_abs_vorticity > 0.0 ? d.max_abs_vorticity_diff / d.max_abs_vorticity : 0.0;
    j["t_final"] = t;
    emit(a.out, dump(j));
    return 0;
}

struct OptimaArgs {
    double tol = 0.02;
    std::string out;
};

int cmd_optima(const OptimaArgs& a) {
    const auto rows = check_published_optima(a.tol);
    emit(a.out, dump(to_json(rows)));
    return std::all_of(rows.begin(), rows.end(), [](const PublishedOptimum& r) { return r.pass; }) ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FB-RK(3,2) stability analysis, weight optimization and planar shallow water experiments"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string config;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON file with option values (keys are long option names)")
            ->check(CLI::ExistingFile);
    };
    auto positive_samples = CLI::Range(2, 1 << 20);
    const std::vector<std::string> cases{"qlw", "jet", "rest"};

    NumaxArgs numax;
    auto* s_numax = app.add_subcommand("numax", "Largest stable Courant number for given weights");
    s_numax->add_option("--beta", numax.beta, "b1 b2 b3")->expected(3);
    s_numax->add_option("--froude", numax.froude, "Mean-flow Froude number");
    s_numax->add_option("--tol", numax.tol, "Bisection tolerance")->check(CLI::PositiveNumber);
    s_numax->add_flag("--json", numax.json, "Print a JSON object");
    add_config(s_numax);

    OptimizeArgs optimize_args;
    auto* s_opt = app.add_subcommand("optimize", "Search FB weights maximizing C1 or C2");
    s_opt->add_option("--cost", optimize_args.cost, "c1 or c2")->check(CLI::IsMember({"c1", "c2", "C1", "C2"}));
    s_opt->add_option("--froude", optimize_args.froude, "Mean-flow Froude number");
    s_opt->add_option("--budget", optimize_args.budget, "Cost evaluations")->check(CLI::Range(100, 100000000));
    s_opt->add_option("--seed", optimize_args.seed, "RNG seed");
    s_opt->add_option("--threads", optimize_args.threads, "Worker threads (capped by FBRK_THREADS)");
    s_opt->add_option("--out", optimize_args.out, "Report path (default stdout)");
    add_config(s_opt);

    SpectrumArgs spectrum_args;
    auto* s_spec = app.add_subcommand("spectrum", "Dispersion curve of the 1D amplification matrix");
    s_spec->add_option("--beta", spectrum_args.beta, "b1 b2 b3")->expected(3);
    s_spec->add_option("--samples", spectrum_args.samples, "Points on [0, pi]")->check(positive_samples);
    s_spec->add_option("--format", spectrum_args.format, "wide or long")->check(CLI::IsMember({"wide", "long"}));
    s_spec->add_option("--out", spectrum_args.out, "CSV path (default stdout)");
    s_spec->add_option("--svg", spectrum_args.svg, "Optional SVG plot path");
    add_config(s_spec);

    SimulateArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Run a planar case for a number of steps");
    s_sim->add_option("--case", sim.case_id, "qlw, jet or rest")->check(CLI::IsMember(cases));
    s_sim->add_option("--n", sim.n, "Cells per side")->check(CLI::Range(4, 4096));
    s_sim->add_option("--scheme", sim.scheme, "ssprk3 | rk3 | rk4 | fbrk32:b1,b2,b3");
    s_sim->add_option("--dt", sim.dt, "Time step in seconds (default half the gravity-wave limit)");
    s_sim->add_option("--steps", sim.steps, "Number of steps");
    s_sim->add_option("--snapshot", sim.snapshot, "Final state path");
    s_sim->add_option("--format", sim.format, "Snapshot format")->check(CLI::IsMember({"csv", "binary"}));
    s_sim->add_option("--out", sim.out, "Summary path (default stdout)");
    add_config(s_sim);

    CflArgs cfl;
    auto* s_cfl = app.add_subcommand("cfl", "Maximal stable time step relative to a reference scheme");
    s_cfl->add_option("--case", cfl.case_id, "qlw, jet or rest")->check(CLI::IsMember(cases));
    s_cfl->add_option("--n", cfl.n, "Cells per side")->check(CLI::Range(4, 4096));
    s_cfl->add_option("--scheme", cfl.scheme, "Scheme under test");
    s_cfl->add_option("--ref", cfl.ref, "Reference scheme");
    s_cfl->add_option("--rel-tol", cfl.rel_tol, "Relative bisection tolerance")->check(CLI::PositiveNumber);
    s_cfl->add_option("--threads", cfl.threads, "Worker threads (capped by FBRK_THREADS)");
    s_cfl->add_option("--out", cfl.out, "Report path (default stdout)");
    s_cfl->add_option("--csv", cfl.csv, "Plot table path");
    add_config(s_cfl);

    ConvergeArgs conv;
    auto* s_conv = app.add_subcommand("converge", "Temporal convergence against an RK4 reference");
    s_conv->add_option("--case", conv.case_id, "qlw, jet or rest")->check(CLI::IsMember(cases));
    s_conv->add_option("--n", conv.n, "Cells per side")->check(CLI::Range(4, 4096));
    s_conv->add_option("--scheme", conv.scheme, "Scheme under test");
    s_conv->add_option("--dts", conv.dts, "Strictly decreasing time steps");
    s_conv->add_option("--ref-dt", conv.ref_dt, "RK4 reference step");
    s_conv->add_option("--duration", conv.duration, "Run length in seconds");
    s_conv->add_option("--threads", conv.threads, "Worker threads (capped by FBRK_THREADS)");
    s_conv->add_option("--out", conv.out, "Report path (default stdout)");
    s_conv->add_option("--csv", conv.csv, "Plot table path");
    add_config(s_conv);

    LteArgs lte;
    auto* s_lte = app.add_subcommand("lte", "One-step error slope on the 1D linear wave system");
    s_lte->add_option("--scheme", lte.scheme, "Scheme under test");
    s_lte->add_option("--dts", lte.dts, "Time steps");
    s_lte->add_option("--out", lte.out, "Report path (default stdout)");
    add_config(s_lte);

    DiffArgs diff;
    auto* s_diff = app.add_subcommand("diff", "Vorticity and thickness difference of two runs");
    s_diff->add_option("--case", diff.case_id, "qlw, jet or rest")->check(CLI::IsMember(cases));
    s_diff->add_option("--n", diff.n, "Cells per side")->check(CLI::Range(4, 4096));
    s_diff->add_option("--scheme-a", diff.scheme_a, "First scheme");
    s_diff->add_option("--dt-a", diff.dt_a, "First time step");
    s_diff->add_option("--scheme-b", diff.scheme_b, "Second scheme");
    s_diff->add_option("--dt-b", diff.dt_b, "Second time step");
    s_diff->add_option("--t-final", diff.t_final, "Run length (default: the case duration)");
    s_diff->add_option("--out", diff.out, "Report path (default stdout)");
    add_config(s_diff);

    OptimaArgs optima_args;
    auto* s_optima = app.add_subcommand("optima", "Check nu_max at the published optimal weights");
    s_optima->add_option("--tol", optima_args.tol, "Allowed deviation")->check(CLI::PositiveNumber);
    s_optima->add_option("--out", optima_args.out, "Report path (default stdout)");
    add_config(s_optima);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!config.empty()) apply_config(sub, config);
        if (sub == s_numax) {
            if (numax.beta.empty()) throw DomainError("--beta is required");
            return cmd_numax(numax);
        }
        if (sub == s_opt) return cmd_optimize(optimize_args);
        if (sub == s_spec) {
            if (spectrum_args.beta.empty()) throw DomainError("--beta is required");
            return cmd_spectrum(spectrum_args);
        }
        if (sub == s_sim) return cmd_simulate(sim);
        if (sub == s_cfl) return cmd_cfl(cfl);
        if (sub == s_conv) return cmd_converge(conv);
        if (sub == s_lte) return cmd_lte(lte);
        if (sub == s_diff) return cmd_diff(diff);
        if (sub == s_optima) return cmd_optima(optima_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
