// divopt: closed-form optimal investment / liability-ratio / dividend
// strategies for a jump-diffusion insurer, with Monte Carlo validation,
// sensitivity checks, and figure-data sweeps.

#include <clocale>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "divopt/divopt.hpp"

namespace {

using divopt::RawParams;

struct ParamFlags {
    std::optional<double> r, mu, sigma, alpha, beta, gamma, lambda, rho, p, delta, eta;
};

void add_param_flags(CLI::App* cmd, std::string& config_path, ParamFlags& flags) {
    cmd->add_option("--config", config_path, "model configuration file (flat JSON)")
        ->required();
    cmd->add_option("--r", flags.r, "override risk-free rate");
    cmd->add_option("--mu", flags.mu, "override risky drift");
    cmd->add_option("--sigma", flags.sigma, "override risky volatility");
    cmd->add_option("--alpha", flags.alpha, "override risk drift per unit liability");
    cmd->add_option("--beta", flags.beta, "override risk diffusion per unit liability");
    cmd->add_option("--gamma", flags.gamma, "override jump size per unit liability");
    cmd->add_option("--lambda", flags.lambda, "override jump intensity");
    cmd->add_option("--rho", flags.rho, "override correlation");
    cmd->add_option("--p", flags.p, "override premium rate");
    cmd->add_option("--delta", flags.delta, "override discount rate");
    cmd->add_option("--eta", flags.eta, "override relative risk aversion");
}

RawParams resolve_params(const std::string& config_path, const ParamFlags& f) {
    RawParams raw = divopt::load_config(config_path);
    if (f.r) raw.r = *f.r;
    if (f.mu) raw.mu = *f.mu;
    if (f.sigma) raw.sigma = *f.sigma;
    if (f.alpha) raw.alpha = *f.alpha;
    if (f.beta) raw.beta = *f.beta;
    if (f.gamma) raw.gamma = *f.gamma;
    if (f.lambda) raw.lambda = *f.lambda;
    if (f.rho) raw.rho = *f.rho;
    if (f.p) raw.p = *f.p;
    if (f.delta) raw.delta = *f.delta;
    if (f.eta) raw.eta = *f.eta;
    return raw;
}

std::string g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void print_solution(const divopt::Solution& sol, const divopt::DerivedConstants& d,
                    std::optional<double> x, const std::string& format) {
    const bool power = sol.kind == divopt::Utility::power;
    if (format == "json") {
        nlohmann::json j;
        j["utility"] = power ? "power" : "log";
        j["eta"] = sol.eta;
        j["delta"] = sol.delta;
        j["pi_star"] = sol.strategy.pi;
        j["kappa_star"] = sol.strategy.kappa;
        j["xi_star"] = sol.strategy.xi;
        j["drift_star"] = sol.drift_star;
        if (power) j["psi"] = sol.psi;
        j["sharpe"] = d.sharpe;
        j["A"] = d.a;
        j["B"] = d.b;
        j["C"] = d.c;
        if (x) {
            j["x"] = *x;
            j["value"] = sol.value(*x);
        }
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::cout << "utility=" << (power ? "power" : "log") << "\n";
    std::cout << "eta=" << g12(sol.eta) << "\n";
    std::cout << "delta=" << g12(sol.delta) << "\n";
    std::cout << "pi_star=" << g12(sol.strategy.pi) << "\n";
    std::cout << "kappa_star=" << g12(sol.strategy.kappa) << "\n";
    std::cout << "xi_star=" << g12(sol.strategy.xi) << "\n";
    std::cout << "drift_star=" << g12(sol.drift_star) << "\n";
    if (power)
        std::cout << "psi=" << g12(sol.psi) << "\n";
    std::cout << "sharpe=" << g12(d.sharpe) << "\n";
    std::cout << "A=" << g12(d.a) << "\nB=" << g12(d.b) << "\nC=" << g12(d.c) << "\n";
    if (x) {
        std::cout << "x=" << g12(*x) << "\n";
        std::cout << "value=" << g12(sol.value(*x)) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"optimal investment, liability-ratio, and dividend strategies "
                 "for a jump-diffusion insurer"};
    app.require_subcommand(1);

    // ---- solve ----
    std::string solve_config, solve_format = "text";
    ParamFlags solve_flags;
    std::optional<double> solve_x;
    bool solve_clamp = false;
    auto* solve_cmd = app.add_subcommand("solve", "optimal constant strategy in closed form");
    add_param_flags(solve_cmd, solve_config, solve_flags);
    solve_cmd->add_option("--x", solve_x, "initial wealth; also prints the value function");
    solve_cmd->add_option("--format", solve_format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
    solve_cmd->add_flag("--clamp-boundary", solve_clamp,
                        "return the kappa=0 boundary strategy when C < 0");

    // ---- objective ----
    std::string obj_config;
    ParamFlags obj_flags;
    double obj_pi = 0.0, obj_kappa = 0.0, obj_xi = 0.0, obj_x = 1.0;
    auto* obj_cmd =
        app.add_subcommand("objective", "objective value of a user-supplied constant strategy");
    add_param_flags(obj_cmd, obj_config, obj_flags);
    obj_cmd->add_option("--pi", obj_pi, "investment fraction")->required();
    obj_cmd->add_option("--kappa", obj_kappa, "liability ratio")->required();
    obj_cmd->add_option("--xi", obj_xi, "proportional dividend rate")->required();
    obj_cmd->add_option("--x", obj_x, "initial wealth (default 1)");

    // ---- simulate ----
    std::string sim_config, sim_out, sim_scheme = "exact";
    ParamFlags sim_flags;
    std::optional<double> sim_pi, sim_kappa, sim_xi;
    double sim_x = 1.0, sim_horizon = 10.0;
    std::int64_t sim_steps = 0, sim_paths = 1;
    std::uint64_t sim_seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "dump simulated wealth paths as CSV");
    add_param_flags(sim_cmd, sim_config, sim_flags);
    sim_cmd->add_option("--out", sim_out, "output directory")->required();
    sim_cmd->add_option("--x", sim_x, "initial wealth (default 1)");
    sim_cmd->add_option("--horizon", sim_horizon, "simulation horizon in years");
    sim_cmd->add_option("--steps", sim_steps, "grid steps (default horizon/0.01)");
    sim_cmd->add_option("--paths", sim_paths, "number of paths (default 1)");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed (default 0)");
    sim_cmd->add_option("--scheme", sim_scheme, "exact|euler (default exact)")
        ->check(CLI::IsMember({"exact", "euler"}));
    sim_cmd->add_option("--pi", sim_pi, "strategy override (default: solved optimum)");
    sim_cmd->add_option("--kappa", sim_kappa, "strategy override");
    sim_cmd->add_option("--xi", sim_xi, "strategy override");

    // ---- mc ----
    std::string mc_config, mc_format = "text";
    ParamFlags mc_flags;
    std::optional<double> mc_pi, mc_kappa, mc_xi, mc_horizon;
    double mc_x = 1.0, mc_tail_tol_rel = 1e-4;
    std::int64_t mc_paths = 100000, mc_steps = 0;
    std::uint64_t mc_seed = 0;
    auto* mc_cmd = app.add_subcommand(
        "mc", "Monte Carlo estimate of the objective vs the closed-form value");
    add_param_flags(mc_cmd, mc_config, mc_flags);
    mc_cmd->add_option("--x", mc_x, "initial wealth (default 1)");
    mc_cmd->add_option("--paths", mc_paths, "number of paths (default 100000)");
    mc_cmd->add_option("--seed", mc_seed, "RNG seed (default 0)");
    mc_cmd->add_option("--tail-tol", mc_tail_tol_rel,
                       "truncation tolerance relative to |closed form| (default 1e-4)");
    mc_cmd->add_option("--horizon", mc_horizon, "override the chosen horizon");
    mc_cmd->add_option("--steps", mc_steps, "override the chosen step count");
    mc_cmd->add_option("--pi", mc_pi, "strategy override (default: solved optimum)");
    mc_cmd->add_option("--kappa", mc_kappa, "strategy override");
    mc_cmd->add_option("--xi", mc_xi, "strategy override");
    mc_cmd->add_option("--format", mc_format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // ---- sensitivity ----
    std::string sens_config, sens_wrt = "all", sens_out;
    ParamFlags sens_flags;
    double sens_step = 1e-5;
    auto* sens_cmd = app.add_subcommand(
        "sensitivity", "analytic strategy sensitivities vs central finite differences (CSV)");
    add_param_flags(sens_cmd, sens_config, sens_flags);
    sens_cmd->add_option("--wrt", sens_wrt, "rho|eta|mu_bar|sigma|alpha|beta|all (default all)");
    sens_cmd->add_option("--step", sens_step, "finite-difference step (default 1e-5)");
    sens_cmd->add_option("--out", sens_out, "write sensitivity.csv under this directory");

    // ---- sweep-rho ----
    std::string swr_config, swr_out;
    ParamFlags swr_flags;
    int swr_points = 200;
    std::vector<double> swr_etas = {0.8, 1.0, 2.0, 5.0};
    auto* swr_cmd = app.add_subcommand("sweep-rho",
                                       "correlation sweep of the optimal strategy (CSV + meta)");
    add_param_flags(swr_cmd, swr_config, swr_flags);
    swr_cmd->add_option("--out", swr_out, "output directory")->required();
    swr_cmd->add_option("--points", swr_points, "grid points (default 200)");
    swr_cmd->add_option("--etas", swr_etas, "risk-aversion series (default 0.8 1 2 5)");

    // ---- sweep-lambda ----
    std::string swl_config, swl_out;
    ParamFlags swl_flags;
    int swl_points = 200;
    std::vector<double> swl_rhos = {-0.6, -0.2, 0.2, 0.6};
    auto* swl_cmd = app.add_subcommand(
        "sweep-lambda", "jump-intensity sweep with expected-value premium (CSV + meta)");
    add_param_flags(swl_cmd, swl_config, swl_flags);
    swl_cmd->add_option("--out", swl_out, "output directory")->required();
    swl_cmd->add_option("--points", swl_points, "grid points (default 200)");
    swl_cmd->add_option("--rhos", swl_rhos, "correlation series (default -0.6 -0.2 0.2 0.6)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*solve_cmd) {
            const RawParams raw = resolve_params(solve_config, solve_flags);
            const auto [model, prefs] = divopt::validate(raw);
            divopt::SolveOptions opts;
            opts.clamp_boundary = solve_clamp;
            const divopt::Solution sol = divopt::solve(model, prefs, opts);
            print_solution(sol, divopt::derived_constants(model), solve_x, solve_format);
        } else if (*obj_cmd) {
            const RawParams raw = resolve_params(obj_config, obj_flags);
            const auto [model, prefs] = divopt::validate(raw);
            const divopt::ConstantStrategy u{obj_pi, obj_kappa, obj_xi};
            std::cout << "objective=" << g12(divopt::objective_constant(model, prefs, u, obj_x))
                      << "\n";
        } else if (*sim_cmd) {
            const RawParams raw = resolve_params(sim_config, sim_flags);
            const auto [model, prefs] = divopt::validate(raw);
            divopt::ConstantStrategy u;
            if (sim_pi || sim_kappa || sim_xi) {
                if (!(sim_pi && sim_kappa && sim_xi))
                    throw divopt::DomainError("pass all of --pi --kappa --xi or none");
                u = {*sim_pi, *sim_kappa, *sim_xi};
            } else {
                u = divopt::solve(model, prefs).strategy;
            }
            if (sim_steps <= 0)
                sim_steps = std::int64_t(std::llround(std::ceil(sim_horizon / 0.01)));
            const divopt::TimeGrid grid{sim_horizon, sim_steps};
            for (std::int64_t i = 0; i < sim_paths; ++i) {
                const divopt::Path path =
                    sim_scheme == "euler"
                        ? divopt::euler_path(model, divopt::constant_strategy_fn(u), sim_x, grid,
                                             sim_seed, std::uint64_t(i))
                        : divopt::exact_path(model, u, sim_x, grid, sim_seed, std::uint64_t(i));
                divopt::dump_path_csv(sim_out, std::uint64_t(i), path);
            }
            std::cout << "wrote " << sim_paths << " path file(s) under " << sim_out << "\n";
        } else if (*mc_cmd) {
            const RawParams raw = resolve_params(mc_config, mc_flags);
            const auto [model, prefs] = divopt::validate(raw);
            divopt::ConstantStrategy u;
            double reference;
            const char* reference_kind;
            if (mc_pi || mc_kappa || mc_xi) {
                if (!(mc_pi && mc_kappa && mc_xi))
                    throw divopt::DomainError("pass all of --pi --kappa --xi or none");
                u = {*mc_pi, *mc_kappa, *mc_xi};
                reference = divopt::objective_constant(model, prefs, u, mc_x);
                reference_kind = "objective_constant";
            } else {
                const divopt::Solution sol = divopt::solve(model, prefs);
                u = sol.strategy;
                reference = sol.value(mc_x);
                reference_kind = "value_function";
            }
            const double tail_tol = mc_tail_tol_rel * std::abs(reference);
            const double horizon =
                mc_horizon ? *mc_horizon : divopt::choose_horizon(model, prefs, u, tail_tol, mc_x);
            const divopt::TimeGrid grid =
                mc_steps > 0 ? divopt::TimeGrid{horizon, mc_steps}
                             : divopt::choose_step(model, prefs, u, mc_x, horizon, mc_paths,
                                                   mc_seed);
            const divopt::McEstimate est =
                divopt::mc_objective(model, prefs, u, mc_x, mc_paths, grid, mc_seed);
            if (mc_format == "json") {
                nlohmann::json j;
                j["mean"] = est.mean;
                j["std_error"] = est.std_error;
                j["tail_bound"] = est.horizon_tail_bound;
                j["closed_form"] = reference;
                j["reference"] = reference_kind;
                j["abs_error"] = std::abs(est.mean - reference);
                j["n_paths"] = est.n_paths;
                j["horizon"] = grid.horizon;
                j["steps"] = grid.steps;
                j["seed"] = mc_seed;
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "mean=" << g12(est.mean) << "\n";
                std::cout << "std_error=" << g12(est.std_error) << "\n";
                std::cout << "tail_bound=" << g12(est.horizon_tail_bound) << "\n";
                std::cout << "closed_form=" << g12(reference) << " (" << reference_kind << ")\n";
                std::cout << "abs_error=" << g12(std::abs(est.mean - reference)) << "\n";
                std::cout << "n_paths=" << est.n_paths << "\n";
                std::cout << "horizon=" << g12(grid.horizon) << "\n";
                std::cout << "steps=" << grid.steps << "\n";
                std::cout << "seed=" << mc_seed << "\n";
            }
        } else if (*sens_cmd) {
            const RawParams raw = resolve_params(sens_config, sens_flags);
            const auto [model, prefs] = divopt::validate(raw);
            const divopt::FdReport report =
                sens_wrt == "all"
                    ? divopt::fd_check_all(model, prefs, sens_step)
                    : divopt::fd_check(model, prefs, divopt::wrt_from_string(sens_wrt), sens_step);
            const std::string csv = divopt::to_csv(report);
            if (sens_out.empty()) {
                std::cout << csv;
            } else {
                std::filesystem::create_directories(sens_out);
                const auto file = std::filesystem::path(sens_out) / "sensitivity.csv";
                std::ofstream out(file);
                if (!out)
                    throw divopt::IoError("cannot open " + file.string());
                out << csv;
                std::cout << "wrote " << file.string() << "\n";
            }
        } else if (*swr_cmd) {
            const RawParams raw = resolve_params(swr_config, swr_flags);
            const divopt::SweepTable table = divopt::sweep_rho(raw, swr_etas, swr_points);
            std::filesystem::create_directories(swr_out);
            const auto file = (std::filesystem::path(swr_out) / "rho_sweep.csv").string();
            divopt::emit_csv(table, file);
            divopt::emit_meta(table, file);
            std::cout << "wrote " << file << "\n";
        } else if (*swl_cmd) {
            const RawParams raw = resolve_params(swl_config, swl_flags);
            const divopt::SweepTable table = divopt::sweep_lambda(raw, swl_rhos, swl_points);
            std::filesystem::create_directories(swl_out);
            const auto file = (std::filesystem::path(swl_out) / "lambda_sweep.csv").string();
            divopt::emit_csv(table, file);
            divopt::emit_meta(table, file);
            std::cout << "wrote " << file << "\n";
        }
    } catch (const divopt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
