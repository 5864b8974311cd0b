#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "divopt/errors.hpp"
#include "divopt/model.hpp"

namespace divopt {

/// Sharpe ratio Lambda = (mu - r)/sigma and the quadratic constants
///   A = gamma beta^2 (1 - rho^2)
///   B = beta^2 (1 - rho^2) + gamma (p - alpha + beta rho Lambda)
///   C = p - alpha + beta rho Lambda - lambda gamma.
/// A > 0 and B > 0 always; C >= 0 is the feasibility condition for an
/// interior optimum (automatic when rho >= 0).
struct DerivedConstants {
    double sharpe = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

inline DerivedConstants derived_constants(const Model& m) {
    DerivedConstants d;
    d.sharpe = m.mu_bar() / m.sigma();
    const double one_m_rho2 = 1.0 - m.rho() * m.rho();
    const double c0 = m.p_bar() + m.beta() * m.rho() * d.sharpe;
    d.a = m.gamma() * m.beta() * m.beta() * one_m_rho2;
    d.b = m.beta() * m.beta() * one_m_rho2 + m.gamma() * c0;
    d.c = c0 - m.lambda() * m.gamma();
    return d;
}

/// Constant control triplet: investment fraction pi (any real), liability
/// ratio kappa in [0, 1/gamma) (or [0, inf) when lambda = 0), proportional
/// dividend rate xi >= 0 so that D_t = xi * X_t.
struct ConstantStrategy {
    double pi = 0.0;
    double kappa = 0.0;
    double xi = 0.0;
};

inline bool is_admissible(const Model& m, const ConstantStrategy& u) noexcept {
    return std::isfinite(u.pi) && u.kappa >= 0.0 && u.kappa < m.kappa_bound() && u.xi >= 0.0;
}

inline void require_admissible(const Model& m, const ConstantStrategy& u) {
    if (!is_admissible(m, u))
        throw DomainError("inadmissible constant strategy: pi=" + std::to_string(u.pi) +
                          " kappa=" + std::to_string(u.kappa) + " xi=" + std::to_string(u.xi));
}

namespace detail {

inline void require_kappa_domain(const Model& m, double y2) {
    if (!(y2 >= 0.0 && y2 < m.kappa_bound()))
        throw DomainError("liability ratio argument " + std::to_string(y2) +
                          " outside [0, " + std::to_string(m.kappa_bound()) + ")");
}

inline double quad_form(const Model& m, double y1, double y2) {
    return m.sigma() * m.sigma() * y1 * y1 -
           2.0 * m.beta() * m.rho() * m.sigma() * y1 * y2 + m.beta() * m.beta() * y2 * y2;
}

} // namespace detail

/// Log-wealth drift functional f (log utility):
///   f(y1,y2) = r + (mu-r) y1 + (p-alpha) y2 - (sigma^2 y1^2
///              - 2 beta rho sigma y1 y2 + beta^2 y2^2)/2 + lambda ln(1-gamma y2).
inline double drift_log(const Model& m, double y1, double y2) {
    detail::require_kappa_domain(m, y2);
    double f = m.r() + m.mu_bar() * y1 + m.p_bar() * y2 - 0.5 * detail::quad_form(m, y1, y2);
    if (m.lambda() > 0.0)
        f += m.lambda() * std::log1p(-m.gamma() * y2);
    return f;
}

/// Power-utility drift functional g:
///   g(y1,y2) = r + (mu-r) y1 + (p-alpha) y2 - eta/2 (...) +
///              lambda ((1-gamma y2)^{1-eta} - 1)/(1-eta).
/// eta = 1 is rejected (use drift_log); the jump term is evaluated in
/// expm1/log1p form so drift_power -> drift_log pointwise as eta -> 1.
inline double drift_power(const Model& m, double eta, double y1, double y2) {
    if (!(eta > 0.0))
        throw DomainError("eta must be positive, got " + std::to_string(eta));
    if (eta == 1.0)
        throw EtaIsOne("drift_power requires eta != 1; use drift_log");
    detail::require_kappa_domain(m, y2);
    double g = m.r() + m.mu_bar() * y1 + m.p_bar() * y2 - 0.5 * eta * detail::quad_form(m, y1, y2);
    if (m.lambda() > 0.0) {
        const double l = std::log1p(-m.gamma() * y2);  // ln(1 - gamma y2) <= 0
        g += m.lambda() * std::expm1((1.0 - eta) * l) / (1.0 - eta);
    }
    return g;
}

enum class Utility { log_utility, power };

/// Optimal constant strategy together with the derived quantities needed to
/// evaluate the value function.
struct Solution {
    ConstantStrategy strategy;
    Utility kind = Utility::log_utility;
    double eta = 1.0;          // 1 for log utility
    double delta = 0.0;
    double drift_star = 0.0;   // f* (log) or g* (power) at the optimum
    double psi = std::numeric_limits<double>::quiet_NaN();  // power only; equals xi*
    double value_scale = 0.0;  // log: 1/delta      power: psi^{-eta}/(1-eta)
    double value_shift = 0.0;  // log: (f*-delta)/delta^2   power: unused

    /// V_c(x): log: (1/delta) ln(delta x) + (f*-delta)/delta^2;
    ///         power: psi^{-eta} x^{1-eta} / (1-eta).
    double value(double x) const {
        if (!(x > 0.0))
            throw DomainError("value function requires x > 0");
        if (kind == Utility::log_utility)
            return value_scale * std::log(delta * x) + value_shift;
        return value_scale * std::pow(x, 1.0 - eta);
    }
};

inline double value_function(const Solution& sol, double x) { return sol.value(x); }

struct SolveOptions {
    /// When C < 0, return the kappa = 0 boundary strategy instead of
    /// throwing InfeasibleC. Off by default: the closed-form propositions
    /// do not cover C < 0, so callers must opt in.
    bool clamp_boundary = false;
};

namespace detail {

/// Smaller root of A y^2 - B y + C = 0 for lambda > 0, in stable form:
/// disc = (a0 - gamma(C+lambda gamma))^2 + 4 lambda gamma^2 a0 (exactly
/// nonnegative), root = 2C/(B + sqrt(disc)). For lambda = 0 the quadratic
/// factors as (gamma y - 1)(a0 y - C) and the interior optimum is C/a0,
/// which the generic smaller-root branch would clip to the vacuous 1/gamma
/// bound whenever C/a0 > 1/gamma.
inline double kappa_log_root(const Model& m, const DerivedConstants& d) {
    const double a0 = m.beta() * m.beta() * (1.0 - m.rho() * m.rho());
    if (m.lambda() == 0.0)
        return d.c / a0;
    const double c0 = d.c + m.lambda() * m.gamma();
    const double u = a0 - m.gamma() * c0;
    const double disc = u * u + 4.0 * m.lambda() * m.gamma() * m.gamma() * a0;
    return 2.0 * d.c / (d.b + std::sqrt(disc));
}

} // namespace detail

/// Optimal constant strategy under log utility (Proposition-level closed
/// form): kappa* is the smaller root of A y^2 - B y + C = 0, pi* =
/// (mu-r)/sigma^2 + (rho beta/sigma) kappa*, xi* = delta.
inline Solution solve_log(const Model& m, double delta, const SolveOptions& opts = {}) {
    if (!(delta > 0.0))
        throw DomainError("delta must be positive, got " + std::to_string(delta));
    const DerivedConstants d = derived_constants(m);
    double kappa;
    if (d.c < 0.0) {
        if (!opts.clamp_boundary)
            throw InfeasibleC("C = " + std::to_string(d.c) +
                              " < 0: no interior optimum (pass clamp_boundary for kappa = 0)");
        kappa = 0.0;
    } else {
        kappa = detail::kappa_log_root(m, d);
    }
    Solution sol;
    sol.strategy.kappa = kappa;
    sol.strategy.pi = m.mu_bar() / (m.sigma() * m.sigma()) + m.rho() * m.beta() / m.sigma() * kappa;
    sol.strategy.xi = delta;
    sol.kind = Utility::log_utility;
    sol.eta = 1.0;
    sol.delta = delta;
    sol.drift_star = drift_log(m, sol.strategy.pi, kappa);
    sol.value_scale = 1.0 / delta;
    sol.value_shift = (sol.drift_star - delta) / (delta * delta);
    return sol;
}

/// Solves (1 - gamma y)^{-eta} + (eta A/(lambda gamma^2)) y - C/(lambda gamma) - 1 = 0
/// for the unique root in [0, 1/gamma). Safeguarded Newton on the
/// lambda*gamma-scaled residual, bracketed on [0, (1/gamma)(1 - 1e-12)],
/// started from the log-utility quadratic root, bisection fallback whenever
/// a Newton step leaves the bracket.
inline double kappa_root_power(const Model& m, double eta) {
    if (!(m.lambda() > 0.0))
        throw DomainError("kappa_root_power requires lambda > 0");
    if (!(eta > 0.0))
        throw DomainError("eta must be positive, got " + std::to_string(eta));
    if (eta == 1.0)
        throw EtaIsOne("kappa_root_power requires eta != 1; use the log-utility quadratic");
    const DerivedConstants d = derived_constants(m);
    if (d.c < 0.0)
        throw InfeasibleC("C = " + std::to_string(d.c) + " < 0: no root in [0, 1/gamma)");
    if (d.c == 0.0)
        return 0.0;

    const double gam = m.gamma();
    const double lg = m.lambda() * gam;
    const double slope = eta * d.a / gam;  // scaled linear coefficient
    // scaled residual: lg*((1-gamma y)^{-eta} - 1) + slope*y - C; increasing in y
    const auto resid = [&](double y, double& df) {
        const double w = std::pow(1.0 - gam * y, -eta);
        df = lg * eta * gam * std::pow(1.0 - gam * y, -eta - 1.0) + slope;
        return lg * (w - 1.0) + slope * y - d.c;
    };

    double lo = 0.0;
    double hi = (1.0 / gam) * (1.0 - 1e-12);
    double y = detail::kappa_log_root(m, d);  // initial guess
    if (!(y > lo && y < hi))
        y = 0.5 * (lo + hi);
    double df = 0.0;
    double fy = 0.0;
    for (int it = 0; it < 200; ++it) {
        fy = resid(y, df);
        if (fy == 0.0)
            return y;
        if (fy > 0.0)
            hi = y;
        else
            lo = y;
        double y_new = y - fy / df;
        const bool newton_ok = std::isfinite(y_new) && y_new > lo && y_new < hi && y_new != y;
        if (!newton_ok)
            y_new = lo + 0.5 * (hi - lo);  // bisect
        if (y_new == lo || y_new == hi || y_new == y)
            return y_new;  // bracket exhausted at machine precision
        y = y_new;
    }
    throw ConvergenceFailure("kappa_root_power: 200 iterations exhausted at y = " +
                             std::to_string(y) + ", scaled residual = " + std::to_string(fy) +
                             ", bracket [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

/// Optimal constant strategy under power utility, no jumps (lambda = 0):
///   kappa* = (p - alpha + beta rho Lambda)/(eta beta^2 (1-rho^2)),
///   pi*    = (mu-r)/(eta sigma^2) + (rho beta/sigma) kappa*,
///   g^     = r + (p - alpha + beta rho Lambda)^2/(2 eta beta^2 (1-rho^2)) + Lambda^2/(2 eta),
///   xi*    = (delta - (1-eta) g^)/eta.
/// Requires p - alpha + beta rho Lambda > 0 and delta > (1-eta) g^.
/// eta = 1 yields the log-utility solution (xi* = delta).
inline Solution solve_diffusion(const Model& m, const Preferences& prefs,
                                const SolveOptions& opts = {}) {
    validate(prefs);
    if (m.lambda() != 0.0)
        throw DomainError("solve_diffusion requires lambda = 0, got " +
                          std::to_string(m.lambda()));
    const double eta = prefs.eta;
    const double sharpe = m.mu_bar() / m.sigma();
    const double c0 = m.p_bar() + m.beta() * m.rho() * sharpe;
    const double a0 = m.beta() * m.beta() * (1.0 - m.rho() * m.rho());
    double kappa;
    if (!(c0 > 0.0)) {
        if (!opts.clamp_boundary)
            throw InfeasibleC("p - alpha + beta rho Lambda = " + std::to_string(c0) +
                              " <= 0: no interior optimum");
        kappa = 0.0;
    } else {
        kappa = c0 / (eta * a0);
    }

    Solution sol;
    sol.strategy.kappa = kappa;
    sol.strategy.pi =
        m.mu_bar() / (eta * m.sigma() * m.sigma()) + m.rho() * m.beta() / m.sigma() * kappa;
    sol.delta = prefs.delta;
    sol.eta = eta;
    if (eta == 1.0) {
        sol.kind = Utility::log_utility;
        sol.strategy.xi = prefs.delta;
        sol.drift_star = drift_log(m, sol.strategy.pi, kappa);
        sol.value_scale = 1.0 / prefs.delta;
        sol.value_shift = (sol.drift_star - prefs.delta) / (prefs.delta * prefs.delta);
        return sol;
    }
    sol.kind = Utility::power;
    sol.drift_star = drift_power(m, eta, sol.strategy.pi, kappa);
    const double psi = (prefs.delta - (1.0 - eta) * sol.drift_star) / eta;
    if (!(psi > 0.0))
        throw IllPosed("psi = " + std::to_string(psi) +
                       " <= 0: the problem value is infinite (delta too small)");
    sol.psi = psi;
    sol.strategy.xi = psi;
    sol.value_scale = std::pow(psi, -eta) / (1.0 - eta);
    return sol;
}

/// Optimal constant strategy under power utility (eta != 1). kappa* comes
/// from kappa_root_power when lambda > 0 and from the no-jump corollary
/// otherwise; xi* = psi = (delta - (1-eta) g*)/eta must be positive.
inline Solution solve_power(const Model& m, const Preferences& prefs,
                            const SolveOptions& opts = {}) {
    validate(prefs);
    const double eta = prefs.eta;
    if (eta == 1.0)
        throw EtaIsOne("solve_power requires eta != 1; use solve_log");
    if (m.lambda() == 0.0) {
        // Corollary path; C = c0 here and C = 0 gives the kappa* = 0 boundary.
        const DerivedConstants d = derived_constants(m);
        if (d.c == 0.0) {
            Solution sol;
            sol.strategy.kappa = 0.0;
            sol.strategy.pi = m.mu_bar() / (eta * m.sigma() * m.sigma());
            sol.kind = Utility::power;
            sol.eta = eta;
            sol.delta = prefs.delta;
            sol.drift_star = drift_power(m, eta, sol.strategy.pi, 0.0);
            const double psi = (prefs.delta - (1.0 - eta) * sol.drift_star) / eta;
            if (!(psi > 0.0))
                throw IllPosed("psi = " + std::to_string(psi) + " <= 0");
            sol.psi = psi;
            sol.strategy.xi = psi;
            sol.value_scale = std::pow(psi, -eta) / (1.0 - eta);
            return sol;
        }
        return solve_diffusion(m, prefs, opts);
    }

    const DerivedConstants d = derived_constants(m);
    double kappa;
    if (d.c < 0.0) {
        if (!opts.clamp_boundary)
            throw InfeasibleC("C = " + std::to_string(d.c) +
                              " < 0: no interior optimum (pass clamp_boundary for kappa = 0)");
        kappa = 0.0;
    } else {
        kappa = kappa_root_power(m, eta);
    }
    Solution sol;
    sol.strategy.kappa = kappa;
    sol.strategy.pi =
        m.mu_bar() / (eta * m.sigma() * m.sigma()) + m.rho() * m.beta() / m.sigma() * kappa;
    sol.kind = Utility::power;
    sol.eta = eta;
    sol.delta = prefs.delta;
    sol.drift_star = drift_power(m, eta, sol.strategy.pi, kappa);
    const double psi = (prefs.delta - (1.0 - eta) * sol.drift_star) / eta;
    if (!(psi > 0.0))
        throw IllPosed("psi = " + std::to_string(psi) +
                       " <= 0: the problem value is infinite (delta too small)");
    sol.psi = psi;
    sol.strategy.xi = psi;
    sol.value_scale = std::pow(psi, -eta) / (1.0 - eta);
    return sol;
}

/// Entry point dispatching on eta: eta = 1 exactly goes to solve_log; eta
/// within 1e-9 of 1 (but not equal) is rejected, since the power formulas
/// degenerate there; anything else goes to solve_power (which covers
/// lambda = 0 via the corollary).
inline Solution solve(const Model& m, const Preferences& prefs, const SolveOptions& opts = {}) {
    validate(prefs);
    if (prefs.eta == 1.0)
        return solve_log(m, prefs.delta, opts);
    if (std::abs(prefs.eta - 1.0) <= 1e-9)
        throw DispatchAmbiguity("eta = " + std::to_string(prefs.eta) +
                                " is within 1e-9 of 1; pass eta = 1 exactly for log utility");
    return solve_power(m, prefs, opts);
}

/// Objective value J(x; u_c) of an arbitrary admissible constant strategy.
///   log:   (ln x + ln xi)/delta + f(pi,kappa)/delta^2 - xi/delta^2
///   power: x^{1-eta}/(1-eta) * xi^{1-eta} / (delta - (1-eta) g(pi,kappa) + (1-eta) xi),
/// provided the denominator is positive (IllPosed otherwise). xi = 0 under
/// log utility is a DomainError (U(0) = -inf); under power utility it
/// evaluates naturally to 0 (eta < 1) or -inf (eta > 1).
inline double objective_constant(const Model& m, const Preferences& prefs,
                                 const ConstantStrategy& u, double x) {
    validate(prefs);
    require_admissible(m, u);
    if (!(x > 0.0))
        throw DomainError("objective_constant requires x > 0");
    if (prefs.eta == 1.0) {
        if (u.xi == 0.0)
            throw DomainError("xi = 0 under log utility gives U(0) = -inf");
        const double f = drift_log(m, u.pi, u.kappa);
        const double inv_d = 1.0 / prefs.delta;
        return inv_d * std::log(x) + inv_d * std::log(u.xi) + inv_d * inv_d * f -
               inv_d * inv_d * u.xi;
    }
    const double eta = prefs.eta;
    const double g = drift_power(m, eta, u.pi, u.kappa);
    const double q = prefs.delta - (1.0 - eta) * g + (1.0 - eta) * u.xi;
    if (!(q > 0.0))
        throw IllPosed("positivity proviso fails: delta - (1-eta) g + (1-eta) xi = " +
                       std::to_string(q));
    return std::pow(x, 1.0 - eta) / (1.0 - eta) * std::pow(u.xi, 1.0 - eta) / q;
}

} // namespace divopt
