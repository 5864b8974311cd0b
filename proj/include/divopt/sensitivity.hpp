#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "divopt/closed_form.hpp"
#include "divopt/errors.hpp"
#include "divopt/model.hpp"

namespace divopt {

/// Parameter tags for strategy sensitivities. mu_bar is the excess return
/// mu - r (perturbing mu with r fixed).
enum class Wrt { rho, eta, mu_bar, sigma, alpha, beta };

inline const char* to_string(Wrt w) {
    switch (w) {
        case Wrt::rho: return "rho";
        case Wrt::eta: return "eta";
        case Wrt::mu_bar: return "mu_bar";
        case Wrt::sigma: return "sigma";
        case Wrt::alpha: return "alpha";
        case Wrt::beta: return "beta";
    }
    return "?";
}

inline Wrt wrt_from_string(const std::string& s) {
    if (s == "rho") return Wrt::rho;
    if (s == "eta") return Wrt::eta;
    if (s == "mu_bar") return Wrt::mu_bar;
    if (s == "sigma") return Wrt::sigma;
    if (s == "alpha") return Wrt::alpha;
    if (s == "beta") return Wrt::beta;
    throw UnsupportedParameter("unsupported sensitivity parameter \"" + s +
                               "\" (expected rho|eta|mu_bar|sigma|alpha|beta)");
}

inline constexpr Wrt all_wrt[] = {Wrt::rho, Wrt::eta, Wrt::mu_bar,
                                  Wrt::sigma, Wrt::alpha, Wrt::beta};

/// Total derivatives of (pi*, kappa*, xi*) with respect to one parameter.
struct StrategyGradient {
    Wrt wrt = Wrt::rho;
    double d_pi = 0.0;
    double d_kappa = 0.0;
    double d_xi = 0.0;
};

/// Analytic sensitivities of the no-jump (lambda = 0) optimal strategy.
/// All expressions are total derivatives of the closed-form solution
///   kappa* = c0/(eta a0), pi* = mu_bar/(eta sigma^2) + (rho beta/sigma)kappa*,
///   xi* = (delta - (1-eta) g^)/eta,
/// with c0 = p_bar + beta rho Lambda and a0 = beta^2 (1-rho^2), so each one
/// matches a central finite difference of the solver.
inline StrategyGradient grad(const Model& m, const Preferences& prefs, Wrt wrt) {
    validate(prefs);
    if (m.lambda() != 0.0)
        throw DomainError("analytic sensitivities require lambda = 0 "
                          "(use fd_check for jump models)");
    const Solution sol = solve_diffusion(m, prefs);
    const double eta = prefs.eta;
    const double sigma = m.sigma(), beta = m.beta(), rho = m.rho();
    const double sharpe = m.mu_bar() / sigma;
    const double mb = m.mu_bar(), pb = m.p_bar();
    const double one_m_rho2 = 1.0 - rho * rho;
    const double k = sol.strategy.kappa;
    const double pi = sol.strategy.pi;
    const double xi = sol.strategy.xi;
    const double ghat = sol.drift_star;

    StrategyGradient g;
    g.wrt = wrt;
    switch (wrt) {
        case Wrt::rho:
            g.d_kappa = (sharpe / (eta * beta) + 2.0 * rho * k) / one_m_rho2;
            g.d_pi = beta / sigma * k + rho * beta / sigma * g.d_kappa;
            g.d_xi = -(1.0 - eta) / eta * (beta * sharpe * k + eta * rho * beta * beta * k * k);
            break;
        case Wrt::eta:
            g.d_pi = -pi / eta;
            g.d_kappa = -k / eta;
            g.d_xi = -xi / eta + (ghat + (eta - 1.0) * m.r()) / (eta * eta);
            break;
        case Wrt::mu_bar:
            g.d_pi = 1.0 / (eta * sigma * sigma * one_m_rho2);
            g.d_kappa = rho / (eta * beta * sigma * one_m_rho2);
            g.d_xi = -(1.0 - eta) / (eta * eta) * (rho * pb + beta * sharpe) /
                     (beta * sigma * one_m_rho2);
            break;
        case Wrt::sigma:
            g.d_pi = -(2.0 - rho * rho) * sharpe / (eta * sigma * sigma * one_m_rho2) -
                     rho * beta * k / (sigma * sigma);
            g.d_kappa = -rho * mb / (eta * beta * sigma * sigma * one_m_rho2);
            g.d_xi = (1.0 - eta) / (eta * eta) * (mb / (sigma * sigma)) *
                     (rho * pb + beta * sharpe) / (beta * one_m_rho2);
            break;
        case Wrt::alpha:
            g.d_kappa = -1.0 / (eta * beta * beta * one_m_rho2);
            g.d_pi = rho * beta / sigma * g.d_kappa;
            g.d_xi = (1.0 - eta) / eta * k;
            break;
        case Wrt::beta:
            g.d_kappa = -(2.0 * pb + beta * rho * sharpe) /
                        (eta * beta * beta * beta * one_m_rho2);
            g.d_pi = rho / sigma * (k + beta * g.d_kappa);
            g.d_xi = (1.0 - eta) / (eta * eta) * (pb * pb + beta * rho * pb * sharpe) /
                     (beta * beta * beta * one_m_rho2);
            break;
    }
    return g;
}

/// One verification row: analytic value vs central finite difference of the
/// solver. rel_error = |analytic - fd| / max(1, |analytic|). fd_only rows
/// (jump models, where no analytic formulas exist) leave analytic and
/// rel_error unset.
struct FdRow {
    Wrt wrt = Wrt::rho;
    const char* component = "";
    double analytic = std::numeric_limits<double>::quiet_NaN();
    double finite_diff = 0.0;
    double rel_error = std::numeric_limits<double>::quiet_NaN();
    bool fd_only = false;
};

struct FdReport {
    double step = 0.0;
    std::vector<FdRow> rows;
};

namespace detail {

inline void apply_bump(MarketParams& mk, InsuranceParams& ins, Preferences& prefs, Wrt wrt,
                       double bump) {
    switch (wrt) {
        case Wrt::rho: ins.rho += bump; break;
        case Wrt::eta: prefs.eta += bump; break;
        case Wrt::mu_bar: mk.mu += bump; break;
        case Wrt::sigma: mk.sigma += bump; break;
        case Wrt::alpha: ins.alpha += bump; break;
        case Wrt::beta: ins.beta += bump; break;
    }
}

inline ConstantStrategy solve_bumped(const Model& m, const Preferences& prefs, Wrt wrt,
                                     double bump) {
    MarketParams mk = m.market();
    InsuranceParams ins = m.insurance();
    Preferences pr = prefs;
    apply_bump(mk, ins, pr, wrt, bump);
    const Model bumped = validate(mk, ins);
    if (bumped.lambda() == 0.0)
        return solve_diffusion(bumped, pr).strategy;
    if (pr.eta == 1.0)
        return solve_log(bumped, pr.delta).strategy;
    return solve_power(bumped, pr).strategy;
}

} // namespace detail

/// Central-difference verification of the analytic sensitivities (lambda = 0)
/// or pure finite differences for jump models (fd_only). One automatic
/// halving retry when a perturbed model leaves the feasible set; after that,
/// FeasibilityLost.
inline FdReport fd_check(const Model& m, const Preferences& prefs, Wrt wrt, double step = 1e-5) {
    validate(prefs);
    if (!(step > 0.0))
        throw DomainError("fd step must be positive");
    const bool analytic_available = m.lambda() == 0.0;

    for (int attempt = 0; attempt < 2; ++attempt, step /= 2.0) {
        ConstantStrategy up, dn;
        try {
            up = detail::solve_bumped(m, prefs, wrt, step);
            dn = detail::solve_bumped(m, prefs, wrt, -step);
        } catch (const Error&) {
            continue;  // halve and retry once
        }
        FdReport report;
        report.step = step;
        const double fd[3] = {(up.pi - dn.pi) / (2.0 * step), (up.kappa - dn.kappa) / (2.0 * step),
                              (up.xi - dn.xi) / (2.0 * step)};
        const char* names[3] = {"pi", "kappa", "xi"};
        double analytic[3] = {0.0, 0.0, 0.0};
        if (analytic_available) {
            const StrategyGradient g = grad(m, prefs, wrt);
            analytic[0] = g.d_pi;
            analytic[1] = g.d_kappa;
            analytic[2] = g.d_xi;
        }
        for (int i = 0; i < 3; ++i) {
            FdRow row;
            row.wrt = wrt;
            row.component = names[i];
            row.finite_diff = fd[i];
            row.fd_only = !analytic_available;
            if (analytic_available) {
                row.analytic = analytic[i];
                row.rel_error =
                    std::abs(analytic[i] - fd[i]) / std::max(1.0, std::abs(analytic[i]));
            }
            report.rows.push_back(row);
        }
        return report;
    }
    throw FeasibilityLost("fd_check: perturbed model infeasible for wrt = " +
                          std::string(to_string(wrt)) + " even after halving the step");
}

/// All six parameter tags in one report.
inline FdReport fd_check_all(const Model& m, const Preferences& prefs, double step = 1e-5) {
    FdReport report;
    for (const Wrt w : all_wrt) {
        const FdReport one = fd_check(m, prefs, w, step);
        report.step = one.step;
        report.rows.insert(report.rows.end(), one.rows.begin(), one.rows.end());
    }
    return report;
}

/// CSV serialization: header wrt,component,analytic,finite_diff,rel_error.
/// fd_only rows leave analytic and rel_error empty.
inline std::string to_csv(const FdReport& report) {
    std::string out = "wrt,component,analytic,finite_diff,rel_error\n";
    char buf[160];
    for (const FdRow& row : report.rows) {
        if (row.fd_only) {
            std::snprintf(buf, sizeof buf, "%s,%s,,%.12g,\n", to_string(row.wrt), row.component,
                          row.finite_diff);
        } else {
            std::snprintf(buf, sizeof buf, "%s,%s,%.12g,%.12g,%.12g\n", to_string(row.wrt),
                          row.component, row.analytic, row.finite_diff, row.rel_error);
        }
        out += buf;
    }
    return out;
}

} // namespace divopt
