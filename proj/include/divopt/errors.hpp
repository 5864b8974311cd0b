#pragma once

#include <stdexcept>
#include <string>

namespace divopt {

/// Base class for all library errors. `exit_code()` is the process exit
/// status the CLI maps the error to:
///   1 = IO / usage errors
///   2 = validation / feasibility errors
///   3 = ill-posedness or numerical failure
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual int exit_code() const noexcept { return 2; }
};

/// A standing model assumption failed. `name()` identifies the inequality,
/// e.g. "mu_le_r", "premium_not_fair", "rho_out_of_range", "nonpositive_sigma".
class AssumptionViolation : public Error {
public:
    AssumptionViolation(std::string name, const std::string& detail)
        : Error("assumption violated [" + name + "]: " + detail), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }
private:
    std::string name_;
};

/// Loading factor theta <= 0 in the expected-value premium rule.
struct NonpositiveLoading : Error { using Error::Error; };

/// Argument outside the mathematical domain of an operation.
struct DomainError : Error { using Error::Error; };

/// drift_power / power-utility path called with eta == 1 (use the log path).
struct EtaIsOne : Error { using Error::Error; };

/// eta is within 1e-9 of 1 but not exactly 1; caller must pass eta = 1.
struct DispatchAmbiguity : Error { using Error::Error; };

/// C < 0 (or the corollary's strict positivity fails): the closed-form
/// interior optimum does not exist. Opt in to the kappa = 0 boundary
/// solution via SolveOptions::clamp_boundary.
struct InfeasibleC : Error { using Error::Error; };

/// The problem value is infinite (psi <= 0, or a nonpositive decay rate).
struct IllPosed : Error {
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// Root iteration budget exhausted; message carries diagnostics.
struct ConvergenceFailure : Error {
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// A finite-difference perturbation left the feasible set.
struct FeasibilityLost : Error { using Error::Error; };

/// Unknown sensitivity parameter tag.
struct UnsupportedParameter : Error {
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

/// find_threshold: no sign change along the requested series.
struct NoCrossing : Error { using Error::Error; };

/// find_threshold: no interior extremum along the requested series.
struct NoInteriorExtremum : Error { using Error::Error; };

/// Sweep table has no rows to emit.
struct EmptyTable : Error { using Error::Error; };

/// Configuration file problems (missing file, bad key, parse failure).
struct ConfigError : Error {
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

/// Filesystem failure surfaced verbatim.
struct IoError : Error {
    using Error::Error;
    int exit_code() const noexcept override { return 1; }
};

} // namespace divopt
