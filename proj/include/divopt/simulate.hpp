#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "divopt/closed_form.hpp"
#include "divopt/errors.hpp"
#include "divopt/model.hpp"
#include "divopt/rng.hpp"

namespace divopt {

/// Uniform grid t_k = k * horizon / steps, k = 0..steps.
struct TimeGrid {
    double horizon = 0.0;
    std::int64_t steps = 0;

    TimeGrid() = default;
    TimeGrid(double T, std::int64_t n) : horizon(T), steps(n) {
        if (!(T > 0.0) || n < 1)
            throw DomainError("time grid requires horizon > 0 and steps >= 1");
    }
    double step() const noexcept { return horizon / double(steps); }
};

/// Simulated wealth trajectory on a grid. jump_count is the cumulative
/// Poisson count at each grid point. For exact constant-strategy paths the
/// wealth is strictly positive everywhere; euler paths may be absorbed at
/// zero, in which case ruin_time records the first crossing.
struct Path {
    std::vector<double> times;
    std::vector<double> wealth;
    std::vector<std::int64_t> jump_count;
    double ruin_time = std::numeric_limits<double>::infinity();

    bool ruined() const noexcept { return std::isfinite(ruin_time); }
};

/// Monte Carlo estimate of the discounted-utility objective truncated at
/// the grid horizon, with the analytic bound on the discarded tail.
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double horizon_tail_bound = 0.0;
};

/// Number of worker threads: DIVOPT_THREADS when set (>= 1), otherwise the
/// hardware concurrency. Estimates are bit-identical for any setting.
inline int worker_count() {
    if (const char* s = std::getenv("DIVOPT_THREADS")) {
        const int n = std::atoi(s);
        if (n >= 1)
            return n;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? int(hc) : 1;
}

namespace detail {

/// Per-step coefficients of the exact log-wealth increment
///   (f - xi) h + (sigma pi - beta rho kappa) dW1
///   - beta sqrt(1-rho^2) kappa dW2 + ln(1-gamma kappa)(dN - lambda h).
struct ExactStepper {
    double drift_h;      // (f - xi) * h
    double vol1_sqh;     // (sigma pi - beta rho kappa) * sqrt(h)
    double vol2_sqh;     // beta sqrt(1-rho^2) kappa * sqrt(h)
    double log_jump;     // ln(1 - gamma kappa); 0 when lambda = 0
    double jump_mean;    // lambda * h
    bool has_jumps;

    ExactStepper(const Model& m, const ConstantStrategy& u, double h) {
        const double f = drift_log(m, u.pi, u.kappa);
        const double sqh = std::sqrt(h);
        drift_h = (f - u.xi) * h;
        vol1_sqh = (m.sigma() * u.pi - m.beta() * m.rho() * u.kappa) * sqh;
        vol2_sqh = m.beta() * std::sqrt(1.0 - m.rho() * m.rho()) * u.kappa * sqh;
        has_jumps = m.lambda() > 0.0;
        log_jump = has_jumps ? std::log1p(-m.gamma() * u.kappa) : 0.0;
        jump_mean = m.lambda() * h;
    }

    /// Advances ln X by one step; returns the Poisson increment.
    std::int64_t advance(double& log_x, std::uint64_t seed, std::uint64_t path,
                         std::uint64_t step) const {
        const double z1 = rng::normal(seed, path, step, rng::W1);
        const double z2 = rng::normal(seed, path, step, rng::W2);
        std::int64_t dn = 0;
        double jump_term = 0.0;
        if (has_jumps) {
            dn = rng::poisson(jump_mean, seed, path, step);
            jump_term = log_jump * (double(dn) - jump_mean);
        }
        log_x += drift_h + vol1_sqh * z1 - vol2_sqh * z2 + jump_term;
        return dn;
    }
};

} // namespace detail

/// Simulates the insurer's wealth under a constant strategy. The joint
/// distribution at the grid points is exact (the SDE solves in closed form),
/// so there is no discretization bias at any step size.
inline Path exact_path(const Model& m, const ConstantStrategy& u, double x, const TimeGrid& grid,
                       std::uint64_t seed, std::uint64_t path_index = 0) {
    require_admissible(m, u);
    if (!(x > 0.0))
        throw DomainError("exact_path requires x > 0");
    const double h = grid.step();
    const detail::ExactStepper stepper(m, u, h);

    Path path;
    path.times.resize(std::size_t(grid.steps) + 1);
    path.wealth.resize(std::size_t(grid.steps) + 1);
    path.jump_count.resize(std::size_t(grid.steps) + 1);
    path.times[0] = 0.0;
    path.wealth[0] = x;
    path.jump_count[0] = 0;
    double log_x = std::log(x);
    std::int64_t jumps = 0;
    for (std::int64_t k = 0; k < grid.steps; ++k) {
        jumps += stepper.advance(log_x, seed, path_index, std::uint64_t(k));
        path.times[std::size_t(k) + 1] = double(k + 1) * h;
        path.wealth[std::size_t(k) + 1] = std::exp(log_x);
        path.jump_count[std::size_t(k) + 1] = jumps;
    }
    return path;
}

/// Control at one (t, X) point for euler_path: investment fraction,
/// liability ratio, and an absolute dividend rate D (not proportional).
struct ControlPoint {
    double pi = 0.0;
    double kappa = 0.0;
    double dividend_rate = 0.0;
};

using StrategyFn = std::function<ControlPoint(double t, double x)>;

/// First-order Euler scheme on the wealth SDE for an arbitrary strategy.
/// The continuous part is advanced first and any jumps then scale wealth by
/// (1-gamma kappa) per jump, so a single jump multiplies wealth by exactly
/// (1-gamma kappa). Wealth is absorbed at zero (ruin), never an error.
inline Path euler_path(const Model& m, const StrategyFn& strategy, double x, const TimeGrid& grid,
                       std::uint64_t seed, std::uint64_t path_index = 0) {
    if (!(x > 0.0))
        throw DomainError("euler_path requires x > 0");
    const double h = grid.step();
    const double sqh = std::sqrt(h);
    const double jump_mean = m.lambda() * h;

    Path path;
    path.times.resize(std::size_t(grid.steps) + 1);
    path.wealth.resize(std::size_t(grid.steps) + 1);
    path.jump_count.resize(std::size_t(grid.steps) + 1);
    path.times[0] = 0.0;
    path.wealth[0] = x;
    path.jump_count[0] = 0;
    double wealth = x;
    std::int64_t jumps = 0;
    for (std::int64_t k = 0; k < grid.steps; ++k) {
        const double t = double(k) * h;
        if (wealth > 0.0) {
            const ControlPoint c = strategy(t, wealth);
            if (!(c.kappa >= 0.0 && c.kappa < m.kappa_bound()))
                throw DomainError("strategy returned kappa outside [0, 1/gamma) at t = " +
                                  std::to_string(t));
            if (!(c.dividend_rate >= 0.0))
                throw DomainError("strategy returned negative dividend rate at t = " +
                                  std::to_string(t));
            const double z1 = rng::normal(seed, path_index, std::uint64_t(k), rng::W1);
            const double z2 = rng::normal(seed, path_index, std::uint64_t(k), rng::W2);
            double next =
                wealth +
                (wealth * (m.r() + m.mu_bar() * c.pi + m.p_bar() * c.kappa) - c.dividend_rate) * h +
                wealth * (m.sigma() * c.pi - m.beta() * m.rho() * c.kappa) * sqh * z1 -
                wealth * m.beta() * std::sqrt(1.0 - m.rho() * m.rho()) * c.kappa * sqh * z2;
            if (m.lambda() > 0.0) {
                const std::int64_t dn = rng::poisson(jump_mean, seed, path_index, std::uint64_t(k));
                jumps += dn;
                for (std::int64_t j = 0; j < dn; ++j)
                    next *= 1.0 - m.gamma() * c.kappa;
            }
            if (!(next > 0.0)) {
                next = 0.0;
                path.ruin_time = double(k + 1) * h;
            }
            wealth = next;
        }
        path.times[std::size_t(k) + 1] = double(k + 1) * h;
        path.wealth[std::size_t(k) + 1] = wealth;
        path.jump_count[std::size_t(k) + 1] = jumps;
    }
    return path;
}

/// Constant strategy adapter for euler_path (D_t = xi X_t).
inline StrategyFn constant_strategy_fn(const ConstantStrategy& u) {
    return [u](double, double x) { return ControlPoint{u.pi, u.kappa, u.xi * x}; };
}

namespace detail {

/// Decay rate q of E[e^{-delta t} U(xi X_t)] = U(xi x) e^{-q t} under power
/// utility: q = delta - (1-eta) g(pi,kappa) + (1-eta) xi.
inline double power_decay_rate(const Model& m, const Preferences& prefs,
                               const ConstantStrategy& u) {
    const double g = drift_power(m, prefs.eta, u.pi, u.kappa);
    return prefs.delta - (1.0 - prefs.eta) * g + (1.0 - prefs.eta) * u.xi;
}

/// Analytic bound on |E[int_T^inf e^{-delta t} U(xi X_t) dt]|.
/// Power: |U(xi x)| e^{-qT}/q (exact). Log: E[...] = e^{-delta t}(ln(xi x)
/// + (f - xi) t), bounded by e^{-delta T}[(|ln(xi x)| + |f-xi| T)/delta
/// + |f-xi|/delta^2].
inline double tail_bound(const Model& m, const Preferences& prefs, const ConstantStrategy& u,
                         double x, double T) {
    if (prefs.eta == 1.0) {
        if (u.xi == 0.0)
            throw DomainError("xi = 0 under log utility gives U(0) = -inf");
        const double b = std::abs(drift_log(m, u.pi, u.kappa) - u.xi);
        const double a = std::abs(std::log(u.xi * x));
        return std::exp(-prefs.delta * T) *
               ((a + b * T) / prefs.delta + b / (prefs.delta * prefs.delta));
    }
    const double q = power_decay_rate(m, prefs, u);
    if (!(q > 0.0))
        throw IllPosed("discounted utility does not decay: q = " + std::to_string(q));
    if (u.xi == 0.0 && prefs.eta > 1.0)
        throw DomainError("xi = 0 with eta > 1 gives U(0) = -inf");
    const double u0 = std::pow(u.xi * x, 1.0 - prefs.eta) / (1.0 - prefs.eta);
    return std::abs(u0) * std::exp(-q * T) / q;
}

} // namespace detail

/// Smallest grid-friendly horizon T (multiple of 0.25 years) whose analytic
/// tail bound is below tail_tol. x defaults to 1, matching the validation
/// setups; scale tail_tol for other initial wealth.
inline double choose_horizon(const Model& m, const Preferences& prefs, const ConstantStrategy& u,
                             double tail_tol, double x = 1.0) {
    validate(prefs);
    require_admissible(m, u);
    if (!(tail_tol > 0.0))
        throw DomainError("tail_tol must be positive");
    const auto bound = [&](double T) { return detail::tail_bound(m, prefs, u, x, T); };
    constexpr double quantum = 0.25;
    double hi = quantum;
    // bound is monotone decreasing in T; find an upper bracket, then bisect
    int guard = 0;
    while (bound(hi) >= tail_tol) {
        hi *= 2.0;
        if (++guard > 60)
            throw IllPosed("tail bound does not reach tail_tol");
    }
    double lo = hi > quantum ? hi / 2.0 : 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-9 * std::max(1.0, hi); ++i) {
        const double mid = 0.5 * (lo + hi);
        (bound(mid) < tail_tol ? hi : lo) = mid;
    }
    return std::max(quantum, std::ceil(hi / quantum) * quantum);
}

/// Monte Carlo estimate of E[int_0^T e^{-delta t} U(xi X_t) dt] by the
/// trapezoid rule on exact constant-strategy paths. Deterministic for fixed
/// (model, prefs, u, x, n_paths, grid, seed) regardless of thread count:
/// draws are counter-based per path and the reduction order is fixed.
inline McEstimate mc_objective(const Model& m, const Preferences& prefs, const ConstantStrategy& u,
                               double x, std::int64_t n_paths, const TimeGrid& grid,
                               std::uint64_t seed, int n_threads = 0) {
    validate(prefs);
    require_admissible(m, u);
    if (!(x > 0.0))
        throw DomainError("mc_objective requires x > 0");
    if (n_paths < 2)
        throw DomainError("mc_objective requires n_paths >= 2");
    const double tail = detail::tail_bound(m, prefs, u, x, grid.horizon);  // also checks decay
    if (prefs.eta == 1.0 && u.xi == 0.0)
        throw DomainError("xi = 0 under log utility gives U(0) = -inf");

    const double h = grid.step();
    const std::int64_t n = grid.steps;
    const detail::ExactStepper stepper(m, u, h);
    const bool log_utility = prefs.eta == 1.0;
    const double one_m_eta = 1.0 - prefs.eta;
    const double log_xi = u.xi > 0.0 ? std::log(u.xi) : -std::numeric_limits<double>::infinity();
    const double log_x0 = std::log(x);

    std::vector<double> integral(static_cast<std::size_t>(n_paths));
    const auto run_range = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t j = begin; j < end; ++j) {
            double log_w = log_x0;
            double acc = 0.0;
            for (std::int64_t k = 0; k <= n; ++k) {
                const double t = double(k) * h;
                const double weight = (k == 0 || k == n) ? 0.5 : 1.0;
                double util;
                if (log_utility) {
                    util = log_xi + log_w;
                } else if (u.xi == 0.0) {
                    util = 0.0;  // eta < 1: U(0) = 0
                } else {
                    util = std::exp(one_m_eta * (log_xi + log_w)) / one_m_eta;
                }
                acc += weight * std::exp(-prefs.delta * t) * util;
                if (k < n)
                    stepper.advance(log_w, seed, std::uint64_t(j), std::uint64_t(k));
            }
            integral[std::size_t(j)] = acc * h;
        }
    };

    int workers = n_threads >= 1 ? n_threads : worker_count();
    workers = int(std::min<std::int64_t>(workers, n_paths));
    if (workers <= 1) {
        run_range(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(workers));
        const std::int64_t chunk = (n_paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::int64_t begin = std::int64_t(w) * chunk;
            const std::int64_t end = std::min(n_paths, begin + chunk);
            if (begin >= end)
                break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool)
            th.join();
    }

    // fixed-order compensated reduction
    double sum = 0.0, comp = 0.0;
    for (const double v : integral) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    const double mean = sum / double(n_paths);
    double ss = 0.0;
    for (const double v : integral) {
        const double d = v - mean;
        ss += d * d;
    }
    McEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(ss / double(n_paths - 1) / double(n_paths));
    est.n_paths = n_paths;
    est.horizon_tail_bound = tail;
    return est;
}

/// Picks the quadrature step by Richardson comparison on pilot runs: the
/// estimated trapezoid bias must fall below one tenth of the projected
/// Monte Carlo standard error, floored at one tenth of the tail bound for
/// (near-)deterministic integrands. Returns a grid on [0, horizon].
inline TimeGrid choose_step(const Model& m, const Preferences& prefs, const ConstantStrategy& u,
                            double x, double horizon, std::int64_t n_paths, std::uint64_t seed) {
    const std::int64_t pilot = std::min<std::int64_t>(2000, std::max<std::int64_t>(n_paths, 2));
    double h = 0.5;
    for (; h > 1.0 / 64.0; h /= 2.0) {
        const auto steps_at = [&](double hh) {
            return std::int64_t(std::llround(std::ceil(horizon / hh)));
        };
        const McEstimate coarse = mc_objective(m, prefs, u, x, pilot, {horizon, steps_at(h)}, seed);
        const McEstimate fine =
            mc_objective(m, prefs, u, x, pilot, {horizon, steps_at(h / 2.0)}, seed);
        const double se_projected =
            fine.std_error * std::sqrt(double(pilot) / double(std::max<std::int64_t>(n_paths, 1)));
        const double target = std::max(se_projected, fine.horizon_tail_bound) / 10.0;
        // |coarse - fine| ~ (3/4) bias(h), so bias(h/2) ~ |coarse - fine|/3
        if (std::abs(coarse.mean - fine.mean) <= 0.75 * target)
            break;
    }
    const double step = h / 2.0;
    return {horizon, std::int64_t(std::llround(std::ceil(horizon / step)))};
}

/// Writes one CSV file per path ("path_000000.csv", ...) with columns
/// time,wealth,jumps under the given directory.
inline void dump_path_csv(const std::filesystem::path& dir, std::uint64_t path_index,
                          const Path& path) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    char name[32];
    std::snprintf(name, sizeof name, "path_%06llu.csv", (unsigned long long)path_index);
    const auto file = dir / name;
    std::ofstream out(file);
    if (!out)
        throw IoError("cannot open " + file.string() + " for writing");
    out << "time,wealth,jumps\n";
    char buf[64];
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%lld\n", path.times[i], path.wealth[i],
                      (long long)path.jump_count[i]);
        out << buf;
    }
    if (!out)
        throw IoError("write failed: " + file.string());
}

} // namespace divopt
