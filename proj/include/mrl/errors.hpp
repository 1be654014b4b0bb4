#pragma once

#include <stdexcept>
#include <string>

namespace mrl {

/// Bad user-supplied arguments: dimension mismatch, out-of-range parameters.
struct ArgumentError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// The kernel was evaluated exactly on its singular locus (u_i = t_i with
/// H_i < 1/2). Callers must integrate across the singularity instead.
struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Requested allocation exceeds the configured memory budget.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The Hurst spec does not factor per axis, so the product-of-1D-processes
/// construction is not defined for it.
struct SpecIncompatibilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Cholesky factorization failed even at the jitter cap.
struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Config file problems: unknown key, unparsable or out-of-range value.
struct ConfigError : std::runtime_error {
    std::string key;
    ConfigError(std::string k, const std::string& what)
        : std::runtime_error("config key '" + k + "': " + what), key(std::move(k)) {}
};

}  // namespace mrl
