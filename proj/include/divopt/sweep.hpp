#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "divopt/closed_form.hpp"
#include "divopt/errors.hpp"
#include "divopt/model.hpp"
#include "divopt/version.hpp"

namespace divopt {

enum class ParamTag { r, mu, sigma, alpha, beta, gamma, lambda, rho, p, delta, eta };

inline const char* to_string(ParamTag t) {
    switch (t) {
        case ParamTag::r: return "r";
        case ParamTag::mu: return "mu";
        case ParamTag::sigma: return "sigma";
        case ParamTag::alpha: return "alpha";
        case ParamTag::beta: return "beta";
        case ParamTag::gamma: return "gamma";
        case ParamTag::lambda: return "lambda";
        case ParamTag::rho: return "rho";
        case ParamTag::p: return "p";
        case ParamTag::delta: return "delta";
        case ParamTag::eta: return "eta";
    }
    return "?";
}

inline void set_param(RawParams& raw, ParamTag tag, double value) {
    switch (tag) {
        case ParamTag::r: raw.r = value; return;
        case ParamTag::mu: raw.mu = value; return;
        case ParamTag::sigma: raw.sigma = value; return;
        case ParamTag::alpha: raw.alpha = value; return;
        case ParamTag::beta: raw.beta = value; return;
        case ParamTag::gamma: raw.gamma = value; return;
        case ParamTag::lambda: raw.lambda = value; return;
        case ParamTag::rho: raw.rho = value; return;
        case ParamTag::p: raw.p = value; return;
        case ParamTag::delta: raw.delta = value; return;
        case ParamTag::eta: raw.eta = value; return;
    }
}

/// How the premium is set at each grid point: keep the configured p, or
/// recompute p = (1+theta)(alpha + lambda gamma).
struct PremiumRule {
    enum Kind { fixed_p, expected_value } kind = fixed_p;
    double theta = 0.5;
};

/// One-parameter sweep with a second parameter as the series/family axis.
struct SweepSpec {
    ParamTag varying = ParamTag::rho;
    double lo = 0.0;
    double hi = 0.0;
    int n_points = 0;
    ParamTag series_param = ParamTag::eta;
    std::vector<double> series;
    std::vector<std::pair<ParamTag, double>> fixed_overrides;
    PremiumRule premium_rule;
};

struct SweepRow {
    double varying = 0.0;
    double series = 0.0;
    double pi_star = 0.0;
    double kappa_star = 0.0;
    double xi_star = 0.0;
    bool feasible = false;
};

/// Plot-ready table plus everything needed to re-solve on the continuum
/// (thresholds are refined on the solver, not by table interpolation).
struct SweepTable {
    RawParams base;
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

namespace detail {

inline RawParams materialize(const RawParams& base, const SweepSpec& spec, double varying_value,
                             double series_value) {
    RawParams raw = base;
    for (const auto& [tag, value] : spec.fixed_overrides)
        set_param(raw, tag, value);
    set_param(raw, spec.varying, varying_value);
    set_param(raw, spec.series_param, series_value);
    if (spec.premium_rule.kind == PremiumRule::expected_value)
        raw.p = expected_value_premium(raw.alpha, raw.lambda, raw.gamma, spec.premium_rule.theta);
    return raw;
}

/// Solves the grid point; nullopt when the point is infeasible
/// (InfeasibleC / IllPosed / a violated standing assumption).
inline std::optional<Solution> solve_point(const RawParams& base, const SweepSpec& spec,
                                           double varying_value, double series_value) {
    const RawParams raw = materialize(base, spec, varying_value, series_value);
    try {
        const auto [model, prefs] = validate(raw);
        return solve(model, prefs);
    } catch (const InfeasibleC&) {
    } catch (const IllPosed&) {
    } catch (const AssumptionViolation&) {
    }
    return std::nullopt;
}

} // namespace detail

/// Runs the sweep; infeasible grid points are flagged, never dropped.
/// Rows are ordered varying-major, series-minor.
inline SweepTable run_sweep(const RawParams& base, const SweepSpec& spec) {
    if (spec.n_points < 2)
        throw DomainError("sweep needs at least 2 grid points");
    if (!(spec.lo < spec.hi))
        throw DomainError("sweep range must satisfy lo < hi");
    if (spec.series.empty())
        throw DomainError("sweep needs at least one series value");
    SweepTable table;
    table.base = base;
    table.spec = spec;
    table.rows.reserve(std::size_t(spec.n_points) * spec.series.size());
    for (int i = 0; i < spec.n_points; ++i) {
        const double v = spec.lo + (spec.hi - spec.lo) * double(i) / double(spec.n_points - 1);
        for (const double s : spec.series) {
            SweepRow row;
            row.varying = v;
            row.series = s;
            if (const auto sol = detail::solve_point(base, spec, v, s)) {
                row.pi_star = sol->strategy.pi;
                row.kappa_star = sol->strategy.kappa;
                row.xi_star = sol->strategy.xi;
                row.feasible = true;
            }
            table.rows.push_back(row);
        }
    }
    return table;
}

/// Correlation sweep behind the rho figure: rho over [-0.8, 0.8], one
/// series per risk-aversion level (default {0.8, 1, 2, 5}), premium fixed.
/// Requires a no-jump base model.
inline SweepTable sweep_rho(const RawParams& base, std::vector<double> etas = {0.8, 1.0, 2.0, 5.0},
                            int n_points = 200) {
    if (base.lambda != 0.0)
        throw DomainError("sweep_rho requires lambda = 0");
    SweepSpec spec;
    spec.varying = ParamTag::rho;
    spec.lo = -0.8;
    spec.hi = 0.8;
    spec.n_points = n_points;
    spec.series_param = ParamTag::eta;
    spec.series = std::move(etas);
    spec.premium_rule.kind = PremiumRule::fixed_p;
    return run_sweep(base, spec);
}

/// Jump-intensity sweep behind the lambda figure: lambda over [0.01, 0.2],
/// one series per correlation (default {-0.6, -0.2, 0.2, 0.6}), premium
/// recomputed per point as p = 1.5 (alpha + lambda gamma), eta = 2,
/// gamma = 0.3.
inline SweepTable sweep_lambda(const RawParams& base,
                               std::vector<double> rhos = {-0.6, -0.2, 0.2, 0.6},
                               int n_points = 200) {
    SweepSpec spec;
    spec.varying = ParamTag::lambda;
    spec.lo = 0.01;
    spec.hi = 0.2;
    spec.n_points = n_points;
    spec.series_param = ParamTag::rho;
    spec.series = std::move(rhos);
    spec.fixed_overrides = {{ParamTag::eta, 2.0}, {ParamTag::gamma, 0.3}};
    spec.premium_rule.kind = PremiumRule::expected_value;
    spec.premium_rule.theta = 0.5;
    return run_sweep(base, spec);
}

enum class Column { pi_star, kappa_star, xi_star };

inline const char* to_string(Column c) {
    switch (c) {
        case Column::pi_star: return "pi_star";
        case Column::kappa_star: return "kappa_star";
        case Column::xi_star: return "xi_star";
    }
    return "?";
}

enum class ThresholdKind { zero_crossing, argmax, argmin };

namespace detail {

inline double column_of(const Solution& sol, Column col) {
    switch (col) {
        case Column::pi_star: return sol.strategy.pi;
        case Column::kappa_star: return sol.strategy.kappa;
        case Column::xi_star: return sol.strategy.xi;
    }
    return 0.0;
}

inline double column_of(const SweepRow& row, Column col) {
    switch (col) {
        case Column::pi_star: return row.pi_star;
        case Column::kappa_star: return row.kappa_star;
        case Column::xi_star: return row.xi_star;
    }
    return 0.0;
}

} // namespace detail

/// Locates a qualitative threshold of one column along the varying axis for
/// one series value. The grid only brackets the feature; the answer is
/// refined on the continuous solver (bisection for zero_crossing, golden
/// section for argmax/argmin).
inline double find_threshold(const SweepTable& table, double series_value, Column col,
                             ThresholdKind kind) {
    std::vector<const SweepRow*> rows;
    for (const SweepRow& row : table.rows)
        if (row.series == series_value && row.feasible)
            rows.push_back(&row);
    if (rows.size() < 3)
        throw DomainError("series has fewer than 3 feasible grid points");

    const auto value_at = [&](double v) {
        const auto sol = detail::solve_point(table.base, table.spec, v, series_value);
        if (!sol)
            throw InfeasibleC("threshold refinement hit an infeasible point at " +
                              std::to_string(v));
        return detail::column_of(*sol, col);
    };

    if (kind == ThresholdKind::zero_crossing) {
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            const double f0 = detail::column_of(*rows[i], col);
            const double f1 = detail::column_of(*rows[i + 1], col);
            if (f0 == 0.0)
                return rows[i]->varying;
            if (f0 * f1 < 0.0) {
                double lo = rows[i]->varying, hi = rows[i + 1]->varying;
                double flo = f0;
                for (int it = 0; it < 200; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid == lo || mid == hi)
                        break;
                    const double fm = value_at(mid);
                    if (fm == 0.0)
                        return mid;
                    if (flo * fm < 0.0) {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        throw NoCrossing("no sign change of " + std::string(to_string(col)) +
                         " along the grid for series " + std::to_string(series_value));
    }

    const double sign = kind == ThresholdKind::argmax ? 1.0 : -1.0;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
        const double fm1 = sign * detail::column_of(*rows[i - 1], col);
        const double f0 = sign * detail::column_of(*rows[i], col);
        const double fp1 = sign * detail::column_of(*rows[i + 1], col);
        if (f0 > fm1 && f0 > fp1) {
            double lo = rows[i - 1]->varying, hi = rows[i + 1]->varying;
            constexpr double inv_phi = 0.6180339887498949;
            double x1 = hi - inv_phi * (hi - lo);
            double x2 = lo + inv_phi * (hi - lo);
            double f1 = sign * value_at(x1);
            double f2 = sign * value_at(x2);
            for (int it = 0; it < 200 && hi - lo > 1e-11 * std::max(1.0, std::abs(hi)); ++it) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = sign * value_at(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = sign * value_at(x1);
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    throw NoInteriorExtremum("no interior " +
                             std::string(kind == ThresholdKind::argmax ? "maximum" : "minimum") +
                             " of " + to_string(col) + " along the grid for series " +
                             std::to_string(series_value));
}

/// CSV emission: header varying,series,pi_star,kappa_star,xi_star,feasible;
/// deterministic row order (varying major, series minor); 12 significant
/// digits; infeasible rows keep empty strategy cells.
inline void emit_csv(const SweepTable& table, const std::string& destination) {
    if (table.rows.empty())
        throw EmptyTable("sweep table has no rows");
    std::ofstream out(destination);
    if (!out)
        throw IoError("cannot open " + destination + " for writing");
    out << "varying,series,pi_star,kappa_star,xi_star,feasible\n";
    char buf[256];
    for (const SweepRow& row : table.rows) {
        if (row.feasible) {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,true\n", row.varying,
                          row.series, row.pi_star, row.kappa_star, row.xi_star);
        } else {
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,,,,false\n", row.varying, row.series);
        }
        out << buf;
    }
    if (!out)
        throw IoError("write failed: " + destination);
}

/// Companion metadata (same stem, .meta): full parameter set + tool version.
inline void emit_meta(const SweepTable& table, const std::string& csv_destination) {
    nlohmann::json j;
    j["tool"] = "divopt";
    j["version"] = version();
    j["base"] = {{"r", table.base.r},         {"mu", table.base.mu},
                 {"sigma", table.base.sigma}, {"alpha", table.base.alpha},
                 {"beta", table.base.beta},   {"gamma", table.base.gamma},
                 {"lambda", table.base.lambda}, {"rho", table.base.rho},
                 {"p", table.base.p},         {"delta", table.base.delta},
                 {"eta", table.base.eta}};
    j["varying"] = to_string(table.spec.varying);
    j["lo"] = table.spec.lo;
    j["hi"] = table.spec.hi;
    j["n_points"] = table.spec.n_points;
    j["series_param"] = to_string(table.spec.series_param);
    j["series"] = table.spec.series;
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [tag, value] : table.spec.fixed_overrides)
        overrides[to_string(tag)] = value;
    j["fixed_overrides"] = overrides;
    j["premium_rule"] = table.spec.premium_rule.kind == PremiumRule::expected_value
                            ? "expected_value"
                            : "fixed_p";
    if (table.spec.premium_rule.kind == PremiumRule::expected_value)
        j["theta"] = table.spec.premium_rule.theta;

    std::string stem = csv_destination;
    const auto dot = stem.find_last_of('.');
    const auto slash = stem.find_last_of("/\\");
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        stem.resize(dot);
    const std::string path = stem + ".meta";
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out)
        throw IoError("write failed: " + path);
}

} // namespace divopt
