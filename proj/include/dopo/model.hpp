#pragma once

// Cavity parameters and their reduction to the dimensionless set used everywhere
// else. Internally time is measured in 1/gamma1 and space in l1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dopo/error.hpp"

namespace dopo {

/// Full two-field cavity constants.
struct ModelParams {
    double gamma0 = 1.0;   // pump damping rate
    double gamma1 = 1.0;   // signal damping rate
    double delta0 = 0.0;   // pump detuning (dimensionless)
    double delta1 = 0.0;   // signal detuning (dimensionless)
    double g = 1.0;        // nonlinear coupling
    double pump_amplitude = 0.0;  // |E_in|
    double l1 = 1.0;       // diffraction length
};

/// Dimensionless parameter set {sigma, mu, delta1} plus the scales.
struct ReducedParams {
    int sigma = +1;
    double mu = 1.0;
    double delta1 = 0.0;
    double kappa = 1.0;
    double gamma1 = 1.0;
    double l1 = 1.0;

    /// 1/kappa, the strength of the quantum noise in the scaled field.
    double noise_scale() const { return std::isinf(kappa) ? 0.0 : 1.0 / kappa; }
};

inline void validate(const ReducedParams& p) {
    if (p.sigma != 1 && p.sigma != -1)
        throw ConfigError("sigma must be +1 or -1");
    if (!(p.kappa > 0.0))
        throw ConfigError("kappa must be positive");
    if (!(p.mu >= 0.0))
        throw ConfigError("mu must be non-negative");
    if (!(p.gamma1 > 0.0) || !(p.l1 > 0.0))
        throw ConfigError("gamma1 and l1 must be positive");
}

struct RegimeOptions {
    /// gamma0 |Delta0| must exceed this multiple of max(gamma1 |Delta1|, gamma0, gamma1).
    double threshold = 10.0;
};

/// Adiabatic elimination of the pump at large pump detuning.
inline ReducedParams reduce_parameters(const ModelParams& full, RegimeOptions opts = {}) {
    if (!(full.gamma0 > 0.0) || !(full.gamma1 > 0.0) || !(full.g > 0.0))
        throw ConfigError("gamma0, gamma1 and g must be positive");
    if (full.delta0 == 0.0)
        throw RegimeError("pump detuning delta0 must be nonzero");
    const double lhs = full.gamma0 * std::abs(full.delta0);
    const double t1 = full.gamma1 * std::abs(full.delta1);
    const double scale = std::max({t1, full.gamma0, full.gamma1});
    if (lhs < opts.threshold * scale) {
        const char* which = scale == t1 ? "gamma1*|delta1|" : (scale == full.gamma0 ? "gamma0" : "gamma1");
        std::ostringstream os;
        os << "large-pump-detuning regime violated: gamma0*|delta0|/" << which << " = " << lhs / scale
           << " < " << opts.threshold;
        throw RegimeError(os.str());
    }
    ReducedParams r;
    r.sigma = full.delta0 > 0.0 ? +1 : -1;
    r.kappa = full.gamma1 * std::sqrt(2.0 * std::abs(full.delta0)) / full.g;
    r.mu = full.g * std::abs(full.pump_amplitude) / (full.gamma1 * full.gamma1 * std::abs(full.delta0));
    r.delta1 = full.delta1;
    r.gamma1 = full.gamma1;
    r.l1 = full.l1;
    return r;
}

/// Conversion between physical and internal (gamma1 = 1, l1 = 1) units.
struct Units {
    double gamma1 = 1.0;
    double l1 = 1.0;

    explicit Units(const ReducedParams& p) : gamma1(p.gamma1), l1(p.l1) {}
    Units(double g1, double l) : gamma1(g1), l1(l) {}

    double omega(double physical_omega) const { return physical_omega / gamma1; }
    double time(double physical_time) const { return physical_time * gamma1; }
    double length(double physical_length) const { return physical_length / l1; }
    double physical_omega(double omega) const { return omega * gamma1; }
    double physical_length(double x) const { return x * l1; }
};

} // namespace dopo
