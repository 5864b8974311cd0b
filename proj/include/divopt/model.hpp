#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "divopt/errors.hpp"

namespace divopt {

/// Financial market coefficients: risk-free rate r, risky drift mu and
/// volatility sigma (per sqrt-year).
struct MarketParams {
    double r = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
};

/// Insurance risk coefficients per unit liability: drift alpha, diffusion
/// beta, jump size gamma, Poisson intensity lambda, correlation rho with the
/// risky asset, and unit premium rate p.
struct InsuranceParams {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    double rho = 0.0;
    double p = 0.0;
};

/// Subjective discount rate delta and relative risk aversion eta.
/// eta == 1 selects log utility.
struct Preferences {
    double delta = 0.0;
    double eta = 0.0;
};

/// Flat parameter bundle matching the configuration-file keys one to one.
struct RawParams {
    double r = 0.0, mu = 0.0, sigma = 0.0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0, lambda = 0.0, rho = 0.0, p = 0.0;
    double delta = 0.0, eta = 0.0;

    MarketParams market() const { return {r, mu, sigma}; }
    InsuranceParams insurance() const { return {alpha, beta, gamma, lambda, rho, p}; }
    Preferences preferences() const { return {delta, eta}; }
};

/// Validated market + insurance parameter bundle. Only validate() builds
/// one, so solver and simulator inputs always satisfy the standing
/// assumptions (mu > r, p > alpha + lambda*gamma, sigma,beta,gamma > 0,
/// lambda >= 0, |rho| < 1).
class Model {
public:
    const MarketParams& market() const noexcept { return market_; }
    const InsuranceParams& insurance() const noexcept { return insurance_; }

    double r() const noexcept { return market_.r; }
    double mu() const noexcept { return market_.mu; }
    double sigma() const noexcept { return market_.sigma; }
    double alpha() const noexcept { return insurance_.alpha; }
    double beta() const noexcept { return insurance_.beta; }
    double gamma() const noexcept { return insurance_.gamma; }
    double lambda() const noexcept { return insurance_.lambda; }
    double rho() const noexcept { return insurance_.rho; }
    double p() const noexcept { return insurance_.p; }

    /// Excess return mu - r.
    double mu_bar() const noexcept { return market_.mu - market_.r; }
    /// Excess premium p - alpha.
    double p_bar() const noexcept { return insurance_.p - insurance_.alpha; }

    /// Upper limit of the admissible liability ratio. The jump-survival
    /// constraint kappa < 1/gamma only binds when jumps can occur; with
    /// lambda == 0 the Poisson process is a.s. zero and the bound is +inf.
    double kappa_bound() const noexcept {
        return insurance_.lambda > 0.0 ? 1.0 / insurance_.gamma
                                       : std::numeric_limits<double>::infinity();
    }

private:
    Model(MarketParams m, InsuranceParams i) : market_(m), insurance_(i) {}
    friend Model validate(const MarketParams&, const InsuranceParams&);

    MarketParams market_;
    InsuranceParams insurance_;
};

/// Checks the standing assumptions and returns the validated bundle.
/// Throws AssumptionViolation naming the inequality that failed.
inline Model validate(const MarketParams& m, const InsuranceParams& i) {
    auto num = [](double v) { return std::to_string(v); };
    if (!(std::isfinite(m.r) && std::isfinite(m.mu) && std::isfinite(m.sigma)))
        throw AssumptionViolation("nonfinite_market", "r, mu, sigma must be finite");
    if (!(m.sigma > 0.0))
        throw AssumptionViolation("nonpositive_sigma", "sigma = " + num(m.sigma));
    if (!(m.mu > m.r))
        throw AssumptionViolation("mu_le_r", "mu = " + num(m.mu) + " <= r = " + num(m.r));
    if (!(std::isfinite(i.alpha) && std::isfinite(i.beta) && std::isfinite(i.gamma) &&
          std::isfinite(i.lambda) && std::isfinite(i.rho) && std::isfinite(i.p)))
        throw AssumptionViolation("nonfinite_insurance", "insurance parameters must be finite");
    if (!(i.beta > 0.0))
        throw AssumptionViolation("nonpositive_beta", "beta = " + num(i.beta));
    if (!(i.gamma > 0.0))
        throw AssumptionViolation("nonpositive_gamma", "gamma = " + num(i.gamma));
    if (!(i.lambda >= 0.0))
        throw AssumptionViolation("negative_lambda", "lambda = " + num(i.lambda));
    if (!(i.rho > -1.0 && i.rho < 1.0))
        throw AssumptionViolation("rho_out_of_range", "rho = " + num(i.rho));
    if (!(i.p > i.alpha + i.lambda * i.gamma))
        throw AssumptionViolation("premium_not_fair",
                                  "p = " + num(i.p) + " <= alpha + lambda*gamma = " +
                                      num(i.alpha + i.lambda * i.gamma));
    return Model(m, i);
}

/// Checks delta > 0 and eta > 0 and returns the preference pair.
inline Preferences validate(const Preferences& prefs) {
    if (!(std::isfinite(prefs.delta) && prefs.delta > 0.0))
        throw AssumptionViolation("nonpositive_delta", "delta = " + std::to_string(prefs.delta));
    if (!(std::isfinite(prefs.eta) && prefs.eta > 0.0))
        throw AssumptionViolation("nonpositive_eta", "eta = " + std::to_string(prefs.eta));
    return prefs;
}

/// Three-argument form: validates everything together.
inline std::pair<Model, Preferences> validate(const MarketParams& m, const InsuranceParams& i,
                                              const Preferences& prefs) {
    return {validate(m, i), validate(prefs)};
}

inline std::pair<Model, Preferences> validate(const RawParams& raw) {
    return validate(raw.market(), raw.insurance(), raw.preferences());
}

/// Expected-value premium rule: p = (1 + theta) * (alpha + lambda * gamma).
/// The result always satisfies the fair-premium assumption for theta > 0.
inline double expected_value_premium(double alpha, double lambda, double gamma, double theta) {
    if (!(theta > 0.0))
        throw NonpositiveLoading("loading factor theta must be positive, got " +
                                 std::to_string(theta));
    return (1.0 + theta) * (alpha + lambda * gamma);
}

} // namespace divopt
