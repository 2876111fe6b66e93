#pragma once

// Positive-P Langevin integration of the reduced signal equation
//
//   df  = [-(1+i D1) f + mu f+ + i f'' + i sigma f^2 f+] dt + (1/kappa) sqrt(mu + i sigma f^2) dW
//   df+ = [-(1-i D1) f+ + mu f - i f+'' - i sigma f+^2 f] dt + (1/kappa) sqrt(mu - i sigma f+^2) dW+
//
// with independent real Wiener fields W, W+. The linear part (including the mu
// coupling) is a 2x2 block per Fourier mode and is propagated exactly; the cubic
// term uses the ETD2RK corrector and the Ito noise increment, sampled at the start
// of the step, is carried through exp(A dt/2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "dopo/error.hpp"
#include "dopo/philox.hpp"
#include "dopo/spectral.hpp"
#include "dopo/stationary.hpp"

namespace dopo {

enum class TrackingMode { static_lof, tracked_lof };

struct SimConfig {
    ReducedParams params;
    GridPtr grid = make_grid();
    double dt = 0.01;
    double t_end = 40.0;
    int n_trajectories = 1;
    std::uint64_t seed = 1;
    TrackingMode tracking = TrackingMode::tracked_lof;
    double delay = 0.0;             // t_d for the tracked LOF
    double divergence_factor = 100.0;  // max|f| > factor * beta flags a spike
    bool noise = true;

    double beta() const { return params.mu < 1.0 ? 0.0 : std::sqrt(std::max(beta_squared(params), 0.0)); }
    double divergence_threshold() const { return divergence_factor * std::max(beta(), 1.0); }

    void validate() const {
        dopo::validate(params);
        if (!grid)
            throw ConfigError("simulation grid missing");
        if (!(dt > 0.0) || !(t_end > 0.0))
            throw ConfigError("dt and t_end must be positive");
        const double b2 = params.mu < 1.0 ? 0.0 : std::abs(beta_squared(params));
        const double limit = 0.1 * std::min(1.0, b2 > 0.0 ? 1.0 / b2 : 1.0);
        if (dt > limit) {
            std::ostringstream os;
            os << "dt = " << dt << " exceeds 0.1*min(1, 1/beta^2) = " << limit;
            throw ConfigError(os.str());
        }
        if (n_trajectories < 1)
            throw ConfigError("n_trajectories must be >= 1");
        if (delay < 0.0)
            throw ConfigError("tracking delay must be non-negative");
        if (!(divergence_factor > 0.0))
            throw ConfigError("divergence factor must be positive");
    }
};

/// Principal square root (non-negative real part).
inline cplx square_root_branch(cplx z) { return std::sqrt(z); }

/// One positive-P trajectory. Fields are held as unnormalised Fourier spectra
/// (Nyquist mode zero); f() and f_plus() give grid values.
struct TrajectoryState {
    GridPtr grid;
    CVec s1;  // spectrum of f
    CVec s2;  // spectrum of f+
    double t = 0.0;
    std::uint64_t step = 0;
    std::uint32_t trajectory = 0;
    double position = 0.0;
    bool diverged = false;
    std::uint64_t branch_flips = 0;

    ComplexField f() const { return {grid, fft::inverse(s1)}; }
    ComplexField f_plus() const { return {grid, fft::inverse(s2)}; }
};

/// Estimate r1 from the intensity Re(f+ f): a circular mean locates the
/// structure, then a linear centroid within half a domain around it refines it.
/// The result is unwrapped against `previous`.
inline double track_position(const Grid1D& grid, std::span<const cplx> f, std::span<const cplx> fp, double previous,
                             double min_weight = 1e-6) {
    const std::size_t n = grid.n_points();
    const double L = grid.length();
    RVec I(n);
    cplx circ{};
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        I[j] = std::max((fp[j] * f[j]).real(), 0.0);
        total += I[j];
        circ += I[j] * std::polar(1.0, 2.0 * std::numbers::pi * grid.x(j) / L);
    }
    if (!(total * grid.spacing() > min_weight) || std::abs(circ) < 1e-12 * total)
        throw TrackingError("intensity too low to locate the structure");
    const double c0 = std::arg(circ) * L / (2.0 * std::numbers::pi);
    const double window = 0.25 * L;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double y = grid.wrap(grid.x(j) - c0);
        if (std::abs(y) < window) {
            const double w = I[j] * (1.0 - std::pow(y / window, 8));  // soft edge
            num += w * y;
            den += w;
        }
    }
    const double c = grid.wrap(c0 + num / den);
    return previous + grid.wrap(c - previous);
}

inline double track_position(const TrajectoryState& s, double previous = 0.0) {
    const CVec f = fft::inverse(s.s1), fp = fft::inverse(s.s2);
    return track_position(*s.grid, f, fp, previous);
}

class Integrator {
public:
    struct Workspace {
        CVec F1, F2, G1, G2, N1, N2, X1, X2, A1, A2, M1, M2, scratch;
        RVec eta1, eta2;
        std::vector<signed char> sign1, sign2;
    };

    explicit Integrator(const SimConfig& cfg) : cfg_(cfg), ops_(cfg.grid) {
        cfg_.validate();
        const std::size_t n = ops_.size();
        const auto& p = cfg_.params;
        const auto& k = cfg_.grid->wavenumbers();
        E_.resize(n);
        Eh_.resize(n);
        P1_.resize(n);
        P2_.resize(n);
        const double h = cfg_.dt;
        for (std::size_t j = 0; j < n; ++j) {
            Eigen::Matrix2cd A;
            A << cplx(-1.0, -p.delta1 - k[j] * k[j]), p.mu, p.mu, cplx(-1.0, p.delta1 + k[j] * k[j]);
            // exp([[hA, I, 0], [0, 0, I], [0, 0, 0]]) = [[e^{hA}, phi1, phi2], ...]
            Eigen::Matrix<cplx, 6, 6> Z = Eigen::Matrix<cplx, 6, 6>::Zero();
            Z.block<2, 2>(0, 0) = h * A;
            Z.block<2, 2>(0, 2) = Eigen::Matrix2cd::Identity();
            Z.block<2, 2>(2, 4) = Eigen::Matrix2cd::Identity();
            const Eigen::Matrix<cplx, 6, 6> X = Z.exp();
            E_[j] = X.block<2, 2>(0, 0);
            P1_[j] = h * X.block<2, 2>(0, 2);
            P2_[j] = h * X.block<2, 2>(0, 4);
            Eh_[j] = (0.5 * h * A).exp();
        }
        noise_amp_ = cfg_.noise ? cfg_.params.noise_scale() * std::sqrt(cfg_.dt / ops_.fine_spacing()) : 0.0;
        threshold_ = cfg_.divergence_threshold();
    }

    const SimConfig& config() const { return cfg_; }
    const SpectralOps& ops() const { return ops_; }

    Workspace make_workspace() const {
        Workspace w;
        const std::size_t n = ops_.size(), m = ops_.fine_size();
        for (CVec* v : {&w.F1, &w.F2, &w.G1, &w.G2, &w.X1, &w.X2})
            v->assign(m, cplx{});
        for (CVec* v : {&w.N1, &w.N2, &w.A1, &w.A2, &w.M1, &w.M2})
            v->assign(n, cplx{});
        w.eta1.assign(m, 0.0);
        w.eta2.assign(m, 0.0);
        w.sign1.assign(m, 0);
        w.sign2.assign(m, 0);
        return w;
    }

    /// Trajectory started on the classical structure (f+ = conj f).
    TrajectoryState initial_state(const DsSolution& ds, std::uint32_t trajectory) const {
        require_same_grid(ds.grid(), cfg_.grid);
        TrajectoryState s;
        s.grid = cfg_.grid;
        const CVec f = ds.field();
        CVec fc(f.size());
        for (std::size_t j = 0; j < f.size(); ++j)
            fc[j] = std::conj(f[j]);
        s.s1 = ops_.spectrum(f);
        s.s2 = ops_.spectrum(fc);
        s.s1[ops_.size() / 2] = 0.0;
        s.s2[ops_.size() / 2] = 0.0;
        s.trajectory = trajectory;
        s.position = ds.position;
        return s;
    }

    /// Advance one step of length dt. Returns false (and flags the state) on divergence.
    bool step(TrajectoryState& s, Workspace& w) const {
        if (s.diverged)
            return false;
        const std::size_t n = ops_.size(), m = ops_.fine_size();
        const double sg = cfg_.params.sigma;
        const double mu = cfg_.params.mu;

        ops_.to_fine(s.s1, w.F1, w.scratch);
        ops_.to_fine(s.s2, w.F2, w.scratch);
        double peak = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            peak = std::max({peak, std::norm(w.F1[j]), std::norm(w.F2[j])});
        if (!(peak < threshold_ * threshold_)) {
            s.diverged = true;
            return false;
        }
        nonlinear(w.F1, w.F2, w.N1, w.N2, w);

        const bool noisy = noise_amp_ > 0.0;
        if (noisy) {
            if (s.step == 0) {
                std::fill(w.sign1.begin(), w.sign1.end(), 0);
                std::fill(w.sign2.begin(), w.sign2.end(), 0);
            }
            rng_.fill(s.trajectory, s.step, 0, w.eta1);
            rng_.fill(s.trajectory, s.step, 1, w.eta2);
            for (std::size_t j = 0; j < m; ++j) {
                const cplx z1 = mu + cplx(0.0, sg) * w.F1[j] * w.F1[j];
                const cplx z2 = mu - cplx(0.0, sg) * w.F2[j] * w.F2[j];
                s.branch_flips += flip(z1, w.sign1[j]) + flip(z2, w.sign2[j]);
                w.G1[j] = noise_amp_ * square_root_branch(z1) * w.eta1[j];
                w.G2[j] = noise_amp_ * square_root_branch(z2) * w.eta2[j];
            }
            ops_.from_fine(w.G1, w.X1, w.scratch);
            ops_.from_fine(w.G2, w.X2, w.scratch);
        }

        for (std::size_t j = 0; j < n; ++j) {
            const Eigen::Vector2cd u(s.s1[j], s.s2[j]);
            const Eigen::Vector2cd N(w.N1[j], w.N2[j]);
            Eigen::Vector2cd a = E_[j] * u + P1_[j] * N;
            if (noisy)
                a += Eh_[j] * Eigen::Vector2cd(w.X1[j], w.X2[j]);
            w.A1[j] = a(0);
            w.A2[j] = a(1);
        }
        w.A1[n / 2] = 0.0;
        w.A2[n / 2] = 0.0;

        ops_.to_fine(w.A1, w.F1, w.scratch);
        ops_.to_fine(w.A2, w.F2, w.scratch);
        nonlinear(w.F1, w.F2, w.M1, w.M2, w);
        for (std::size_t j = 0; j < n; ++j) {
            const Eigen::Vector2cd d(w.M1[j] - w.N1[j], w.M2[j] - w.N2[j]);
            const Eigen::Vector2cd c = P2_[j] * d;
            s.s1[j] = w.A1[j] + c(0);
            s.s2[j] = w.A2[j] + c(1);
        }
        s.s1[n / 2] = 0.0;
        s.s2[n / 2] = 0.0;
        ++s.step;
        s.t = static_cast<double>(s.step) * cfg_.dt;
        return true;
    }

    /// Advance n steps or until divergence.
    bool advance(TrajectoryState& s, std::uint64_t steps, Workspace& w) const {
        for (std::uint64_t i = 0; i < steps; ++i)
            if (!step(s, w))
                return false;
        return true;
    }

private:
    void nonlinear(const CVec& F1, const CVec& F2, CVec& N1, CVec& N2, Workspace& w) const {
        const std::size_t m = ops_.fine_size();
        const double sg = cfg_.params.sigma;
        for (std::size_t j = 0; j < m; ++j) {
            // i sigma f^2 f+ and -i sigma f+^2 f, written out to avoid the checked complex product
            const double a = F1[j].real(), b = F1[j].imag(), c = F2[j].real(), d = F2[j].imag();
            const double p = a * c - b * d, q = a * d + b * c;  // f f+
            const double r1 = a * p - b * q, i1 = a * q + b * p;  // f^2 f+
            const double r2 = c * p - d * q, i2 = c * q + d * p;  // f+^2 f
            w.G1[j] = cplx(-sg * i1, sg * r1);
            w.G2[j] = cplx(sg * i2, -sg * r2);
        }
        ops_.from_fine(w.G1, N1, w.scratch);
        ops_.from_fine(w.G2, N2, w.scratch);
    }

    // Counts a crossing of the principal branch cut (negative real axis).
    static int flip(cplx z, signed char& prev) {
        const signed char sgn = z.imag() >= 0.0 ? 1 : -1;
        const int crossed = (prev != 0 && sgn != prev && z.real() < 0.0) ? 1 : 0;
        prev = sgn;
        return crossed;
    }

    SimConfig cfg_;
    SpectralOps ops_;
    NormalStream rng_{cfg_.seed};
    std::vector<Eigen::Matrix2cd> E_, Eh_, P1_, P2_;
    double noise_amp_ = 0.0;
    double threshold_ = 0.0;
};

} // namespace dopo
