#pragma once

#include <stdexcept>
#include <string>

namespace dopo {

/// Process exit codes used by the command-line front-end.
enum class ExitCode : int {
    success = 0,
    internal = 1,
    config = 2,
    solver = 3,
    instability = 4,
    statistics = 5,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::internal)
        : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

/// Invalid configuration or violated operation precondition.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, ExitCode::config) {}
};

/// Pump below the parametric threshold (mu < 1).
class BelowThresholdError : public ConfigError {
public:
    explicit BelowThresholdError(const std::string& what) : ConfigError(what) {}
};

class RegimeError : public ConfigError {
public:
    explicit RegimeError(const std::string& what) : ConfigError(what) {}
};

class GridMismatchError : public Error {
public:
    explicit GridMismatchError(const std::string& what) : Error(what, ExitCode::internal) {}
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double last_residual = 0.0)
        : Error(what, ExitCode::solver), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Eigenvalue pairing between L and its adjoint failed (defective or ambiguous cluster).
class PairingError : public Error {
public:
    explicit PairingError(const std::string& what) : Error(what, ExitCode::solver) {}
};

class InstabilityError : public Error {
public:
    explicit InstabilityError(const std::string& what) : Error(what, ExitCode::instability) {}
};

/// A mode pair with lambda_p + lambda_q ~ 0 has no stationary correlation.
class MarginalPairError : public InstabilityError {
public:
    explicit MarginalPairError(const std::string& what) : InstabilityError(what) {}
};

class TrackingError : public Error {
public:
    explicit TrackingError(const std::string& what) : Error(what, ExitCode::solver) {}
};

class StatisticsError : public Error {
public:
    explicit StatisticsError(const std::string& what) : Error(what, ExitCode::statistics) {}
};

} // namespace dopo
