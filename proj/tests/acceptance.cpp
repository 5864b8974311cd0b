// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
//
// Each criterion re-derives its expected numbers from an independent route
// (brute-force grid maximization, bisection, central finite differences,
// Monte Carlo) before comparing against the closed-form implementation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "divopt/divopt.hpp"
#include "oracles.hpp"

using namespace divopt;

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass;
    double seconds;
    std::vector<std::string> details;
};

std::vector<Criterion> results;

class Runner {
public:
    Runner(int id, std::string name) : c_{id, std::move(name), true, 0.0, {}} {
        start_ = std::chrono::steady_clock::now();
    }
    void check(bool ok, const std::string& what) {
        if (!ok) {
            c_.pass = false;
            c_.details.push_back("FAIL " + what);
        }
    }
    void note(const std::string& what) { c_.details.push_back(what); }
    void limit(double seconds_allowed) {
        finish();
        if (c_.seconds >= seconds_allowed) {
            c_.pass = false;
            char buf[128];
            std::snprintf(buf, sizeof buf, "FAIL runtime %.2fs exceeds %.0fs", c_.seconds,
                          seconds_allowed);
            c_.details.push_back(buf);
        }
    }
    ~Runner() {
        finish();
        std::printf("criterion %d: %s  %s  [%.2f s]\n", c_.id, c_.pass ? "PASS" : "FAIL",
                    c_.name.c_str(), c_.seconds);
        for (const auto& d : c_.details)
            std::printf("    %s\n", d.c_str());
        results.push_back(c_);
    }

private:
    void finish() {
        c_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
                         .count();
    }
    Criterion c_;
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// ---------------------------------------------------------------- 1
void criterion1() {
    Runner r(1, "closed-form corollary reproduction (Table 1, rho=0, eta=2, lambda=0)");
    const auto raw = oracles::table1();
    const Solution sol = solve_diffusion(validate(raw).first, raw.preferences());
    r.check(std::abs(sol.strategy.pi - 0.32) < 1e-6, fmt("pi* = %.9f != 0.32", sol.strategy.pi));
    r.check(std::abs(sol.strategy.kappa - 2.5) < 1e-6,
            fmt("kappa* = %.9f != 2.5", sol.strategy.kappa));
    r.check(std::abs(sol.strategy.xi - 0.11445) < 1e-6,
            fmt("xi* = %.9f != 0.11445", sol.strategy.xi));
    r.check(std::abs(sol.drift_star - 0.0789) < 1e-6,
            fmt("g^ = %.9f != 0.0789", sol.drift_star));
    // independent 2-D grid maximization of the transcribed drift functional
    const auto q = oracles::from_raw(raw);
    const auto best = oracles::grid_maximize(
        [&](double y1, double y2) { return oracles::drift_power(q, 2.0, y1, y2); }, -5.0, 5.0,
        0.0, 50.0);
    r.check(std::abs(sol.strategy.pi - best.y1) < 1e-6,
            fmt("grid argmax pi %.9f vs closed form %.9f", best.y1, sol.strategy.pi));
    r.check(std::abs(sol.strategy.kappa - best.y2) < 1e-6,
            fmt("grid argmax kappa %.9f vs closed form %.9f", best.y2, sol.strategy.kappa));
    r.check(std::abs(sol.drift_star - best.value) < 1e-9,
            fmt("grid max %.12f vs g^ %.12f", best.value, sol.drift_star));
    r.limit(1.0);
}

// ---------------------------------------------------------------- 2
void criterion2() {
    Runner r(2, "short-selling threshold: pi* zero crossing at rho = -0.32 for every eta");
    const SweepTable t = sweep_rho(oracles::table1());
    double first = 0.0;
    bool first_set = false;
    for (const double eta : {0.8, 1.0, 2.0, 5.0}) {
        const double z = find_threshold(t, eta, Column::pi_star, ThresholdKind::zero_crossing);
        r.check(std::abs(z - (-0.32)) < 1e-3, fmt("crossing %.9f off -0.32 at eta=%.1f", z, eta));
        if (!first_set) {
            first = z;
            first_set = true;
        } else {
            r.check(std::abs(z - first) < 1e-9,
                    fmt("crossing differs across eta: %.12f vs %.12f", z, first));
        }
    }
    r.note(fmt("crossing = %.9f (eta-independent)", first));
    r.limit(1.0);
}

// ---------------------------------------------------------------- 3
void criterion3() {
    Runner r(3, "liability-ratio stationary point at rho = -0.164 for every eta");
    const SweepTable t = sweep_rho(oracles::table1());
    double first = 0.0;
    bool first_set = false;
    for (const double eta : {0.8, 1.0, 2.0, 5.0}) {
        // kappa*(rho) dips then rises: the interior stationary point is a minimum
        const double z = find_threshold(t, eta, Column::kappa_star, ThresholdKind::argmin);
        r.check(std::abs(z - (-0.164)) < 1e-3,
                fmt("stationary point %.9f off -0.164 at eta=%.1f", z, eta));
        if (!first_set) {
            first = z;
            first_set = true;
        } else {
            r.check(std::abs(z - first) < 1e-6,
                    fmt("stationary point differs across eta: %.9f vs %.9f", z, first));
        }
    }
    r.note(fmt("interior stationary point (minimum of kappa*) = %.9f, eta-independent", first));
    r.limit(1.0);
}

// ---------------------------------------------------------------- 4
void criterion4() {
    Runner r(4, "log-utility dividend flatness: xi* = 0.15 on all 200 rho grid points");
    const SweepTable t = sweep_rho(oracles::table1());
    int count = 0;
    for (const auto& row : t.rows) {
        if (row.series != 1.0)
            continue;
        ++count;
        if (row.xi_star != 0.15) {
            r.check(false, fmt("xi* = %.17g at rho = %.6f", row.xi_star, row.varying));
            break;
        }
    }
    r.check(count == 200, fmt("expected 200 grid points, saw %d", double(count)));
    r.limit(1.0);
}

// ---------------------------------------------------------------- 5
void criterion5() {
    Runner r(5, "jump-intensity sweep qualitative suite (p = 1.5(alpha+lambda gamma), eta=2)");
    const std::vector<double> rhos = {-0.6, -0.2, 0.2, 0.6};
    const SweepTable t = sweep_lambda(oracles::table1(), rhos, 200);
    const auto series = [&](double rho) {
        std::vector<const SweepRow*> out;
        for (const auto& row : t.rows)
            if (row.series == rho) {
                if (!row.feasible)
                    r.check(false, fmt("infeasible point at lambda=%.4f rho=%.1f", row.varying,
                                       rho));
                out.push_back(&row);
            }
        return out;
    };

    bool kappa_decreasing = true;
    for (const double rho : rhos) {
        const auto rows = series(rho);
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i]->kappa_star < rows[i - 1]->kappa_star))
                kappa_decreasing = false;
    }
    r.check(kappa_decreasing, "kappa* strictly decreasing in lambda on all four rho series");
    if (kappa_decreasing)
        r.note("PASS kappa* strictly decreasing in lambda on all four rho series");

    bool pi_directions = true;
    for (const double rho : {0.2, 0.6}) {
        const auto rows = series(rho);
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i]->pi_star < rows[i - 1]->pi_star))
                pi_directions = false;
    }
    {
        const auto rows = series(-0.6);
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i]->pi_star > rows[i - 1]->pi_star))
                pi_directions = false;
    }
    r.check(pi_directions,
            "pi* strictly decreasing in lambda for rho in {0.2, 0.6}, increasing for rho = -0.6");
    if (pi_directions)
        r.note("PASS pi* decreasing in lambda (rho = 0.2, 0.6), increasing (rho = -0.6)");

    // kappa* increasing in rho at each fixed lambda, across the four series.
    // This clause does not hold at these parameters: kappa*(rho) is on its
    // decreasing branch at rho = -0.6, so the -0.6 series lies above the
    // -0.2 series until the curves cross near lambda = 0.170.
    bool kappa_in_rho = true;
    double first_bad_lambda = 0.0;
    double bad_lo = 0.0, bad_hi = 0.0;
    for (int i = 0; i < 200 && kappa_in_rho; ++i) {
        std::vector<double> ks;
        double lam = 0.0;
        for (std::size_t sidx = 0; sidx < rhos.size(); ++sidx) {
            const auto& row = t.rows[std::size_t(i) * rhos.size() + sidx];
            ks.push_back(row.kappa_star);
            lam = row.varying;
        }
        for (std::size_t sidx = 1; sidx < ks.size(); ++sidx) {
            if (!(ks[sidx] > ks[sidx - 1])) {
                kappa_in_rho = false;
                first_bad_lambda = lam;
                bad_lo = ks[sidx - 1];
                bad_hi = ks[sidx];
                break;
            }
        }
    }
    r.check(kappa_in_rho, fmt("kappa* increasing in rho at each lambda: first violation at "
                              "lambda=%.4f (kappa=%.4f !< previous %.4f)",
                              first_bad_lambda, bad_hi, bad_lo));
    if (!kappa_in_rho)
        r.note("note: kappa*(rho=-0.6) > kappa*(rho=-0.2) for lambda < 0.1701 at these "
               "parameters; the rho-ordering only holds above the crossing");
    r.limit(5.0);
}

// ---------------------------------------------------------------- 6
void criterion6() {
    Runner r(6, "Monte Carlo value-function validation (1e5 exact paths, x = 1)");
    const auto run_case = [&](const char* label, const RawParams& raw, std::uint64_t seed) {
        const auto [m, prefs] = validate(raw);
        const Solution sol = solve(m, prefs);
        const double v = sol.value(1.0);
        const double tol = 1e-4 * std::abs(v);
        const double T = choose_horizon(m, prefs, sol.strategy, tol);
        const TimeGrid grid = choose_step(m, prefs, sol.strategy, 1.0, T, 100000, seed);
        const McEstimate est = mc_objective(m, prefs, sol.strategy, 1.0, 100000, grid, seed);
        const double gap = std::abs(est.mean - v);
        const double allowed = 3.0 * est.std_error + est.horizon_tail_bound;
        r.check(gap <= allowed, fmt(std::string(std::string("case ") + label +
                                                ": |mc - V| = %.5f > 3se+tail = %.5f")
                                        .c_str(),
                                    gap, allowed));
        r.note(fmt(std::string(std::string("case ") + label +
                               ": |mc-V|=%.4f, 3se=%.4f, tail=%.4f")
                       .c_str(),
                   gap, 3.0 * est.std_error, est.horizon_tail_bound));
    };
    run_case("a (Table 1, rho=0, eta=2, lambda=0)", oracles::table1(), 42);
    run_case("b (gamma=0.3, lambda=0.05, rho=0.2, p=0.1725, eta=2)", oracles::jump_setup(), 7);
    r.limit(120.0);  // 60 s per case
}

// ---------------------------------------------------------------- 7
void criterion7() {
    Runner r(7, "optimality dominance over 1e4 random admissible constant strategies");
    const auto raw = oracles::jump_setup();
    const auto [m, prefs] = validate(raw);
    const Solution sol = solve_power(m, prefs);
    const double v = sol.value(1.0);
    int dominated = 0, diverged = 0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double pi = -2.0 + 5.0 * rng::uniform(1001, i, 0, rng::W1);
        const double kappa = (1.0 / 0.3) * (1.0 - 1e-6) * rng::uniform(1001, i, 0, rng::W2);
        const double xi = 0.001 + 0.999 * rng::uniform(1001, i, 1, rng::W1);
        double J;
        try {
            J = objective_constant(m, prefs, {pi, kappa, xi}, 1.0);
        } catch (const IllPosed&) {
            ++diverged;  // J = -inf under eta > 1: dominated
            continue;
        }
        if (J <= v + 1e-10 * std::abs(v))
            ++dominated;
        else
            r.check(false, fmt("strategy beats the optimum: J = %.12f > V = %.12f", J, v));
    }
    r.check(dominated + diverged == 10000,
            fmt("%g of 10000 strategies dominated", double(dominated + diverged)));
    const double at_opt = objective_constant(m, prefs, sol.strategy, 1.0);
    r.check(std::abs(at_opt - v) <= 1e-12 * std::abs(v),
            fmt("J(u*) = %.15f vs V = %.15f", at_opt, v));
    r.note(fmt("dominated: %g, diverged (J = -inf): %g", double(dominated), double(diverged)));
    r.limit(5.0);
}

// ---------------------------------------------------------------- 8
void criterion8() {
    Runner r(8, "sensitivity suite: analytic partials vs central FD on 100 random models");
    std::mt19937_64 eng(2026);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto raw = oracles::random_diffusion_model(eng);
        const auto [m, prefs] = validate(raw);
        const FdReport report = fd_check_all(m, prefs, 1e-5);
        for (const FdRow& row : report.rows) {
            worst = std::max(worst, row.rel_error);
            if (!(row.rel_error < 1e-6))
                r.check(false, fmt(std::string(std::string("rel_error %.3g for ") +
                                               to_string(row.wrt) + "/" + row.component)
                                       .c_str(),
                                   row.rel_error));
        }

        const Solution sol = solve_diffusion(m, prefs);
        const double k = sol.strategy.kappa;
        const double sharpe = m.mu_bar() / m.sigma();
        const auto g_rho = grad(m, prefs, Wrt::rho);
        const auto g_eta = grad(m, prefs, Wrt::eta);
        const auto g_mb = grad(m, prefs, Wrt::mu_bar);
        const auto g_sg = grad(m, prefs, Wrt::sigma);
        const auto g_al = grad(m, prefs, Wrt::alpha);
        const auto g_be = grad(m, prefs, Wrt::beta);
        if (m.rho() >= 0.0) {
            r.check(g_rho.d_pi > 0.0, fmt("d_pi/d_rho = %.6g <= 0 at rho = %.3f >= 0",
                                          g_rho.d_pi, m.rho()));
            r.check(g_sg.d_pi < 0.0, fmt("d_pi/d_sigma = %.6g >= 0 at rho = %.3f >= 0",
                                         g_sg.d_pi, m.rho()));
        }
        r.check(g_eta.d_kappa < 0.0, fmt("d_kappa/d_eta = %.6g >= 0", g_eta.d_kappa));
        r.check(g_al.d_kappa < 0.0, fmt("d_kappa/d_alpha = %.6g >= 0", g_al.d_kappa));
        r.check(g_be.d_kappa < 0.0, fmt("d_kappa/d_beta = %.6g >= 0", g_be.d_kappa));
        r.check(g_mb.d_pi > 0.0, fmt("d_pi/d_mu_bar = %.6g <= 0", g_mb.d_pi));
        if (m.rho() != 0.0)
            r.check((g_al.d_pi > 0.0) == (m.rho() < 0.0),
                    fmt("sign(d_pi/d_alpha) != -sign(rho) at rho = %.3f", m.rho()));
        r.check(std::abs(g_sg.d_xi + sharpe * g_mb.d_xi) <=
                    1e-10 * std::max(1.0, std::abs(g_sg.d_xi)),
                "cross-relation d_xi/d_sigma = -Lambda d_xi/d_mu_bar");
        const double threshold = sharpe + prefs.eta * m.rho() * m.beta() * k;
        if (std::abs(threshold) > 1e-3 && std::abs(g_rho.d_xi) > 1e-12)
            r.check((g_rho.d_xi > 0.0) == ((prefs.eta > 1.0) == (threshold > 0.0)),
                    fmt("sign(d_xi/d_rho) law at eta = %.3f", prefs.eta));
        if (std::abs(g_al.d_xi) > 1e-12)
            r.check((g_al.d_xi > 0.0) == (prefs.eta < 1.0), "sign(d_xi/d_alpha) = sign(1-eta)");
        if (std::abs(g_be.d_xi) > 1e-12)
            r.check((g_be.d_xi > 0.0) == (prefs.eta < 1.0), "sign(d_xi/d_beta) = sign(1-eta)");
    }
    r.note(fmt("worst |analytic - fd| / max(1,|analytic|) = %.3g over 1800 rows", worst));
    r.limit(10.0);
}

// ---------------------------------------------------------------- 9
void criterion9() {
    Runner r(9, "root-solver contract on 1e3 random jump models + limit consistency");
    std::mt19937_64 eng(555);
    double worst_resid = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto raw = oracles::random_jump_model(eng);
        const auto m = validate(raw).first;
        const double root = kappa_root_power(m, raw.eta);
        r.check(root >= 0.0 && root < 1.0 / raw.gamma,
                fmt("root %.6f outside [0, %.4f)", root, 1.0 / raw.gamma));
        const double resid =
            std::abs(oracles::kappa_power_residual(oracles::from_raw(raw), raw.eta, root));
        worst_resid = std::max(worst_resid, resid);
        if (!(resid < 1e-12))
            r.check(false, fmt("raw residual %.3g at draw %g", resid, double(i)));
    }
    r.note(fmt("worst raw residual = %.3g", worst_resid));

    // eta -> 1: solve_power approaches solve_log componentwise, psi -> delta
    std::mt19937_64 eng2(556);
    double worst_eta = 0.0;
    for (int i = 0; i < 50; ++i) {
        const auto raw = oracles::random_jump_model(eng2);
        const auto m = validate(raw).first;
        const Solution log_sol = solve_log(m, raw.delta);
        for (const double eta : {1.0 + 1e-6, 1.0 - 1e-6}) {
            const Solution pow_sol = solve_power(m, {raw.delta, eta});
            const double d = std::max({std::abs(pow_sol.strategy.pi - log_sol.strategy.pi),
                                       std::abs(pow_sol.strategy.kappa - log_sol.strategy.kappa),
                                       std::abs(pow_sol.psi - raw.delta)});
            worst_eta = std::max(worst_eta, d);
        }
    }
    r.check(worst_eta < 1e-4, fmt("eta->1 limit gap %.3g >= 1e-4", worst_eta));
    r.note(fmt("worst eta->1 componentwise gap = %.3g", worst_eta));

    // lambda -> 0: solve_power at lambda = 1e-10 approaches solve_diffusion
    // (on models whose no-jump optimum is interior to the jump bound)
    std::mt19937_64 eng3(557);
    double worst_lam = 0.0;
    int tested = 0;
    while (tested < 50) {
        RawParams raw = oracles::random_diffusion_model(eng3);
        const Solution diff = solve_diffusion(validate(raw).first, raw.preferences());
        if (!oracles::lambda_limit_comparable(raw, diff.strategy.kappa))
            continue;
        ++tested;
        raw.lambda = 1e-10;
        const Solution pow_sol = solve_power(validate(raw).first, raw.preferences());
        const double d = std::max({std::abs(pow_sol.strategy.pi - diff.strategy.pi),
                                   std::abs(pow_sol.strategy.kappa - diff.strategy.kappa),
                                   std::abs(pow_sol.strategy.xi - diff.strategy.xi)});
        worst_lam = std::max(worst_lam, d);
    }
    r.check(worst_lam < 1e-6, fmt("lambda->0 limit gap %.3g >= 1e-6", worst_lam));
    r.note(fmt("worst lambda->0 componentwise gap = %.3g", worst_lam));
    r.limit(10.0);
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();

    int passed = 0;
    for (const auto& c : results)
        passed += c.pass ? 1 : 0;
    std::printf("RESULT: %d/%d criteria passed\n", passed, int(results.size()));
    return passed == int(results.size()) ? 0 : 1;
}
