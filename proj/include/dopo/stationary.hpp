#pragma once

// Classical stationary dissipative structures of the reduced model,
//   A1 = kappa e^{i sigma theta} F(x),   (sigma d^2 - beta^2 + F^2) F = 0.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "dopo/error.hpp"
#include "dopo/grid.hpp"
#include "dopo/model.hpp"
#include "dopo/spectral.hpp"

namespace dopo {

enum class DsKind { trivial, homogeneous, localized, periodic };

inline const char* to_string(DsKind k) {
    switch (k) {
    case DsKind::trivial: return "trivial";
    case DsKind::homogeneous: return "homogeneous";
    case DsKind::localized: return "localized";
    case DsKind::periodic: return "periodic";
    }
    return "unknown";
}

struct DsSolution {
    RealField profile;      // F on the grid
    double theta = 0.0;     // pump phase
    double beta_sq = 0.0;
    ReducedParams params;
    double position = 0.0;  // r1
    DsKind kind = DsKind::trivial;
    int iterations = 0;     // Newton iterations (0 for closed forms)
    double residual = 0.0;  // discrete stationarity residual, max norm

    const GridPtr& grid() const { return profile.grid; }
    bool trivial() const { return kind == DsKind::trivial; }

    /// Scaled classical field e^{i sigma theta} F.
    CVec field() const {
        const cplx phase = std::polar(1.0, params.sigma * theta);
        CVec out(profile.values.size());
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = phase * profile.values[j];
        return out;
    }
};

inline double beta_squared(const ReducedParams& p) {
    if (p.mu < 1.0) {
        std::ostringstream os;
        os << "pump below threshold: mu = " << p.mu << " < 1";
        throw BelowThresholdError(os.str());
    }
    return p.sigma * p.delta1 + std::sqrt(p.mu * p.mu - 1.0);
}

/// theta in [0, pi/4) with e^{2 i sigma theta} = (1 + i sigma sqrt(mu^2 - 1)) / mu.
inline double pump_phase(const ReducedParams& p) {
    if (p.mu < 1.0) {
        std::ostringstream os;
        os << "pump below threshold: mu = " << p.mu << " < 1";
        throw BelowThresholdError(os.str());
    }
    return 0.5 * std::atan(std::sqrt(p.mu * p.mu - 1.0));
}

/// Galerkin residual sigma F'' - beta^2 F + P[F^3] on the grid.
inline RVec stationarity_residual_field(const ReducedParams& p, double beta_sq, const RealField& F) {
    SpectralOps ops(F.grid);
    const CVec f = SpectralOps::to_complex(F.values);
    const CVec cube = ops.triple_product(f, f, f);
    const RVec lap = ops.laplacian(F.values);
    RVec r(F.values.size());
    for (std::size_t j = 0; j < r.size(); ++j)
        r[j] = p.sigma * lap[j] - beta_sq * F.values[j] + cube[j].real();
    return r;
}

inline double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

inline double stationarity_residual(const DsSolution& ds) {
    return max_abs(stationarity_residual_field(ds.params, ds.beta_sq, ds.profile));
}

/// Residual of sqrt(2) beta sech(beta x) evaluated with its exact derivatives on the grid points.
inline double analytic_soliton_residual(const ReducedParams& p, const Grid1D& grid) {
    const double b2 = beta_squared(p);
    const double b = std::sqrt(b2);
    const double amp = std::sqrt(2.0) * b;
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.n_points(); ++j) {
        const double s = 1.0 / std::cosh(b * grid.x(j));
        const double F = amp * s;
        const double Fxx = amp * b2 * (s - 2.0 * s * s * s);
        worst = std::max(worst, std::abs(Fxx - b2 * F + F * F * F));
    }
    return worst;
}

namespace detail {

inline DsSolution make_solution(const ReducedParams& p, GridPtr grid, RVec F, DsKind kind) {
    DsSolution ds;
    ds.params = p;
    ds.beta_sq = beta_squared(p);
    ds.theta = pump_phase(p);
    ds.profile = RealField{std::move(grid), std::move(F)};
    ds.kind = kind;
    ds.residual = stationarity_residual(ds);
    return ds;
}

inline DsKind classify(const RVec& F) {
    const double peak = max_abs(F);
    if (peak < 1e-8)
        return DsKind::trivial;
    const auto [mn, mx] = std::minmax_element(F.begin(), F.end());
    if (*mx - *mn < 1e-9 * std::max(1.0, peak))
        return DsKind::homogeneous;
    // localized: the profile has decayed at the domain edges
    const std::size_t n = F.size();
    const double edge = std::max({std::abs(F[0]), std::abs(F[1]), std::abs(F[n - 1])});
    return edge < 1e-4 * peak ? DsKind::localized : DsKind::periodic;
}

} // namespace detail

/// Intensity centroid of F^2, unwrapped around the intensity maximum.
inline double intensity_centroid(const Grid1D& grid, std::span<const double> intensity) {
    const auto peak = std::max_element(intensity.begin(), intensity.end()) - intensity.begin();
    const double centre = grid.x(static_cast<std::size_t>(peak));
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < grid.n_points(); ++j) {
        num += intensity[j] * grid.wrap(grid.x(j) - centre);
        den += intensity[j];
    }
    if (den <= 0.0)
        return centre;
    return grid.wrap(centre + num / den);
}

/// 1D bright cavity soliton sqrt(2) beta sech(beta x), centred at x = 0.
inline DsSolution bright_soliton(const ReducedParams& p, const GridPtr& grid) {
    validate(p);
    if (p.sigma != +1)
        throw ConfigError("bright cavity soliton exists only for sigma = +1");
    const double b2 = beta_squared(p);
    if (!(b2 > 0.0))
        throw ConfigError("no localized solution: beta^2 <= 0");
    const double b = std::sqrt(b2);
    RVec F(grid->n_points());
    for (std::size_t j = 0; j < F.size(); ++j)
        F[j] = std::sqrt(2.0) * b / std::cosh(b * grid->x(j));
    return detail::make_solution(p, grid, std::move(F), DsKind::localized);
}

/// Constant solutions: F = sqrt(beta^2) when beta^2 > 0, otherwise F = 0.
inline DsSolution homogeneous_solution(const ReducedParams& p, const GridPtr& grid, bool nonzero_branch = true) {
    validate(p);
    const double b2 = beta_squared(p);
    if (nonzero_branch && b2 > 0.0)
        return detail::make_solution(p, grid, RVec(grid->n_points(), std::sqrt(b2)), DsKind::homogeneous);
    return detail::make_solution(p, grid, RVec(grid->n_points(), 0.0), DsKind::trivial);
}

/// F = 0, stationary for any pump level including below threshold.
inline DsSolution trivial_solution(const ReducedParams& p, const GridPtr& grid) {
    validate(p);
    DsSolution ds;
    ds.params = p;
    ds.beta_sq = p.mu >= 1.0 ? beta_squared(p) : p.sigma * p.delta1;
    ds.theta = p.mu >= 1.0 ? pump_phase(p) : 0.0;
    ds.profile = RealField{grid, RVec(grid->n_points(), 0.0)};
    ds.kind = DsKind::trivial;
    return ds;
}

struct NewtonOptions {
    int max_iter = 50;
    double tolerance = 1e-10;
    bool recenter = true;
};

/// Newton iteration on the Galerkin equations with a dense Jacobian. When the
/// profile is not constant the translation mode is pinned by bordering the
/// Jacobian with F'.
inline DsSolution newton_stationary(const ReducedParams& p, const GridPtr& grid, const RealField& initial_guess,
                                    NewtonOptions opts = {}) {
    validate(p);
    require_same_grid(grid, initial_guess.grid);
    const double b2 = beta_squared(p);
    SpectralOps ops(grid);
    const std::size_t n = grid->n_points();

    Eigen::MatrixXd lap(n, n);
    {
        RVec e(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            e[j] = 1.0;
            const RVec col = ops.laplacian(e);
            for (std::size_t i = 0; i < n; ++i)
                lap(i, j) = col[i];
            e[j] = 0.0;
        }
    }

    RVec F = ops.project(initial_guess.values);
    int it = 0;
    double res = 0.0;
    auto solve_loop = [&](int budget) {
        for (int local = 0;; ++local, ++it) {
            const RVec R = stationarity_residual_field(p, b2, RealField{grid, F});
            res = max_abs(R);
            if (res < opts.tolerance)
                return true;
            if (local >= budget)
                return false;

            // J = sigma D2 - beta^2 + 3 P[F^2 .]
            CVec Ff = ops.values_to_fine(SpectralOps::to_complex(F));
            for (auto& v : Ff)
                v = 3.0 * v * v;
            const RVec g = ops.derivative(F);
            const bool border = max_abs(g) > 1e-8 * std::max(1.0, max_abs(F));
            const std::size_t dim = border ? n + 1 : n;
            Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
            J.topLeftCorner(n, n) = p.sigma * lap;
            CVec e(n, cplx{});
            for (std::size_t j = 0; j < n; ++j) {
                e[j] = 1.0;
                const CVec col = ops.multiply(Ff, e);
                for (std::size_t i = 0; i < n; ++i)
                    J(i, j) += col[i].real();
                J(j, j) -= b2;
                e[j] = 0.0;
            }
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
            for (std::size_t i = 0; i < n; ++i)
                rhs(i) = -R[i];
            if (border) {
                for (std::size_t i = 0; i < n; ++i) {
                    J(i, n) = g[i];
                    J(n, i) = g[i];
                }
            }
            const Eigen::VectorXd step = J.partialPivLu().solve(rhs);
            if (!step.allFinite())
                return false;
            for (std::size_t i = 0; i < n; ++i)
                F[i] += step(i);
            F = ops.project(F);
        }
    };

    if (!solve_loop(opts.max_iter)) {
        std::ostringstream os;
        os << "Newton iteration did not converge after " << opts.max_iter << " iterations (residual " << res << ")";
        throw SolverError(os.str(), res);
    }

    DsKind kind = detail::classify(F);
    if (kind == DsKind::trivial)
        std::fill(F.begin(), F.end(), 0.0);
    if (kind == DsKind::localized && opts.recenter) {
        RVec I(n);
        for (std::size_t j = 0; j < n; ++j)
            I[j] = F[j] * F[j];
        const double c = intensity_centroid(*grid, I);
        if (std::abs(c) > 1e-12 * grid->length()) {
            F = ops.shift(F, -c);
            if (!solve_loop(opts.max_iter)) {
                throw SolverError("Newton iteration failed after re-centering", res);
            }
        }
    }

    DsSolution ds = detail::make_solution(p, grid, std::move(F), kind);
    ds.iterations = it;
    return ds;
}

/// Newton-refined bright soliton: the exact fixed point of the discrete equations.
inline DsSolution refined_bright_soliton(const ReducedParams& p, const GridPtr& grid, NewtonOptions opts = {}) {
    const DsSolution guess = bright_soliton(p, grid);
    return newton_stationary(p, grid, guess.profile, opts);
}

/// Natural-parameter continuation in mu with the given step, starting from a solution.
inline std::vector<DsSolution> continue_in_mu(const DsSolution& start, double mu_end, double step = 0.05,
                                              NewtonOptions opts = {}) {
    std::vector<DsSolution> branch{start};
    const double dir = mu_end >= start.params.mu ? 1.0 : -1.0;
    ReducedParams p = start.params;
    while (dir * (mu_end - p.mu) > 1e-12) {
        p.mu = dir > 0 ? std::min(mu_end, p.mu + step) : std::max(mu_end, p.mu - step);
        branch.push_back(newton_stationary(p, start.grid(), branch.back().profile, opts));
    }
    return branch;
}

// --- CSV persistence ---------------------------------------------------------------

inline void write_ds_csv(std::ostream& os, const DsSolution& ds) {
    os << std::setprecision(17);
    os << "# sigma=" << ds.params.sigma << " mu=" << ds.params.mu << " delta1=" << ds.params.delta1
       << " theta=" << ds.theta << " beta_sq=" << ds.beta_sq << " kappa=" << ds.params.kappa
       << " length=" << ds.grid()->length() << " kind=" << to_string(ds.kind) << "\n";
    os << "x,F\n";
    for (std::size_t j = 0; j < ds.profile.values.size(); ++j)
        os << ds.grid()->x(j) << "," << ds.profile.values[j] << "\n";
}

inline DsSolution read_ds_csv(std::istream& is) {
    std::string line;
    ReducedParams p;
    double length = 0.0;
    std::string kind_name = "localized";
    if (!std::getline(is, line) || line.rfind("#", 0) != 0)
        throw ConfigError("DS csv: missing header record");
    {
        std::istringstream hs(line.substr(1));
        std::string tok;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                continue;
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            if (key == "sigma") p.sigma = std::stoi(val);
            else if (key == "mu") p.mu = std::stod(val);
            else if (key == "delta1") p.delta1 = std::stod(val);
            else if (key == "kappa") p.kappa = std::stod(val);
            else if (key == "length") length = std::stod(val);
            else if (key == "kind") kind_name = val;
        }
    }
    std::getline(is, line);  // column names
    RVec F;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        F.push_back(std::stod(line.substr(comma + 1)));
    }
    if (!(length > 0.0))
        throw ConfigError("DS csv: header lacks domain length");
    auto grid = make_grid(F.size(), length);
    DsKind kind = DsKind::localized;
    for (DsKind k : {DsKind::trivial, DsKind::homogeneous, DsKind::localized, DsKind::periodic})
        if (kind_name == to_string(k))
            kind = k;
    return detail::make_solution(p, grid, std::move(F), kind);
}

} // namespace dopo
