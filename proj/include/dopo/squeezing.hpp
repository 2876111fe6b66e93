#pragma once

// Homodyne squeezing spectra from the modal Ornstein-Uhlenbeck description of
// the linearised fluctuations. For a LOF alpha_L the detected quadrature is
// dE = <(alpha, conj alpha)|a> = sum_p beta_p c_p with beta_p = <alpha_L|v_p>, and
// each c_p obeys dc_p/dt = lambda_p c_p + xi_p with <xi_p xi_q> = D_pq delta(t - t').

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dopo/error.hpp"
#include "dopo/spectral_basis.hpp"

namespace dopo {

enum class LofKind { adjoint_w2, gauss_hermite, custom };

struct LofSpec {
    LofKind kind = LofKind::adjoint_w2;
    double width = 1.0;   // xi, Gauss-Hermite only
    double offset = 0.0;  // xbar
    CVec custom;          // explicit alpha(x) for LofKind::custom

    static LofSpec adjoint_w2(double offset = 0.0) { return {LofKind::adjoint_w2, 1.0, offset, {}}; }
    static LofSpec gauss_hermite(double width, double offset = 0.0) {
        return {LofKind::gauss_hermite, width, offset, {}};
    }
    static LofSpec from_field(CVec alpha) { return {LofKind::custom, 1.0, 0.0, std::move(alpha)}; }

    std::string label() const {
        std::ostringstream os;
        switch (kind) {
        case LofKind::adjoint_w2: os << "w2"; break;
        case LofKind::gauss_hermite: os << "gh1(xi=" << width << ")"; break;
        case LofKind::custom: os << "custom"; break;
        }
        if (offset != 0.0)
            os << "@" << offset;
        return os.str();
    }
};

/// Single-component LOF alpha(x) on the grid, projected onto the retained modes.
inline CVec lof_field(const DsSolution& ds, const LofSpec& lof) {
    const Grid1D& g = *ds.grid();
    SpectralOps ops(ds.grid());
    const cplx ip = cplx(0.0, 1.0) * std::polar(1.0, ds.params.sigma * ds.theta);
    CVec a(g.n_points());
    switch (lof.kind) {
    case LofKind::adjoint_w2: {
        const RVec dF = ops.derivative(ops.shift(ds.profile.values, lof.offset));
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] = ip * dF[j];
        break;
    }
    case LofKind::gauss_hermite: {
        if (!(lof.width > 0.0))
            throw ConfigError("Gauss-Hermite LOF width must be positive");
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double y = g.wrap(g.x(j) - lof.offset);
            a[j] = ip * y * std::exp(-0.5 * y * y / (lof.width * lof.width));
        }
        break;
    }
    case LofKind::custom:
        if (lof.custom.size() != a.size())
            throw GridMismatchError("custom LOF length does not match the grid");
        a = lof.custom;
        break;
    }
    return ops.project(a);
}

/// LOF as a two-component vector (alpha, conj alpha).
inline FluctuationField lof_vector(const GridPtr& grid, const CVec& alpha) {
    FluctuationField v{grid, alpha, CVec(alpha.size())};
    for (std::size_t j = 0; j < alpha.size(); ++j)
        v.second[j] = std::conj(alpha[j]);
    return v;
}

/// Noise covariance of the projected sources xi_p = <w_p|h>, over a chosen set of modes.
struct DiffusionMatrix {
    std::vector<std::size_t> modes;  // indices into the basis
    CMatrix entries;                 // D_pq, symmetric
};

/// D_pq = int [conj(w_p1) conj(w_q1) a0 + conj(w_p2) conj(w_q2) conj(a0)] dx, by quadrature on
/// the dealiasing grid (exact for the band-limited integrands).
inline DiffusionMatrix diffusion_matrix(const SpectralBasis& basis, const LinearOperator& op,
                                        std::vector<std::size_t> modes) {
    const SpectralOps& ops = op.ops();
    const std::size_t m = ops.fine_size();
    const auto K = static_cast<Eigen::Index>(modes.size());
    // Multiplier on the fine grid.
    const CVec a0f = ops.values_to_fine(op.alpha0_bar());
    CMatrix W1(static_cast<Eigen::Index>(m), K), W2(static_cast<Eigen::Index>(m), K);
    for (Eigen::Index c = 0; c < K; ++c) {
        const FluctuationField w = basis.adjoint_mode(op, modes[static_cast<std::size_t>(c)]);
        const CVec f1 = ops.values_to_fine(w.first);
        const CVec f2 = ops.values_to_fine(w.second);
        for (std::size_t j = 0; j < m; ++j) {
            W1(static_cast<Eigen::Index>(j), c) = std::conj(f1[j]);
            W2(static_cast<Eigen::Index>(j), c) = std::conj(f2[j]);
        }
    }
    const double dxf = ops.fine_spacing();
    CVector d1(static_cast<Eigen::Index>(m)), d2(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
        d1(static_cast<Eigen::Index>(j)) = a0f[j] * dxf;
        d2(static_cast<Eigen::Index>(j)) = std::conj(a0f[j]) * dxf;
    }
    DiffusionMatrix D;
    D.modes = std::move(modes);
    D.entries = W1.transpose() * d1.asDiagonal() * W1 + W2.transpose() * d2.asDiagonal() * W2;
    return D;
}

/// All non-Goldstone modes.
inline std::vector<std::size_t> dynamical_modes(const SpectralBasis& basis) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (static_cast<int>(i) != basis.goldstone_index)
            out.push_back(i);
    return out;
}

inline DiffusionMatrix diffusion_matrix(const SpectralBasis& basis, const LinearOperator& op) {
    return diffusion_matrix(basis, op, dynamical_modes(basis));
}

/// Stationary second moments M_pq = <c_p c_q> = -D_pq / (lambda_p + lambda_q).
inline CMatrix modal_correlations(const SpectralBasis& basis, const DiffusionMatrix& D, double marginal_tol = 1e-8) {
    const auto K = static_cast<Eigen::Index>(D.modes.size());
    CMatrix M(K, K);
    for (Eigen::Index p = 0; p < K; ++p)
        for (Eigen::Index q = 0; q < K; ++q) {
            const cplx s = basis.eigenvalues[D.modes[static_cast<std::size_t>(p)]] +
                           basis.eigenvalues[D.modes[static_cast<std::size_t>(q)]];
            if (s.real() > -marginal_tol) {
                std::ostringstream os;
                os << "mode pair (" << D.modes[static_cast<std::size_t>(p)] << ", "
                   << D.modes[static_cast<std::size_t>(q)] << ") has Re(lambda_p + lambda_q) = " << s.real()
                   << ": no stationary correlation";
                throw MarginalPairError(os.str());
            }
            M(p, q) = -D.entries(p, q) / s;
        }
    return M;
}

/// Default frequency grid: omega = 0 plus 200 log-spaced points in [1e-2, 1e2].
inline RVec default_omegas() {
    RVec w{0.0};
    for (int i = 0; i < 200; ++i)
        w.push_back(std::pow(10.0, -2.0 + 4.0 * i / 199.0));
    return w;
}

enum class SpectrumMethod { modal, monte_carlo, closed_form };

inline const char* to_string(SpectrumMethod m) {
    switch (m) {
    case SpectrumMethod::modal: return "modal";
    case SpectrumMethod::monte_carlo: return "monte_carlo";
    case SpectrumMethod::closed_form: return "closed_form";
    }
    return "unknown";
}

struct SqueezingSpectrum {
    RVec omegas;
    RVec values;
    RVec std_errors;  // empty for deterministic spectra
    LofSpec lof;
    SpectrumMethod method = SpectrumMethod::modal;
    std::optional<double> window;  // t_H; empty means infinite
    double goldstone_weight = 0.0; // |<alpha_L|v_G>| / |alpha_L|, modal only
};

struct ModalOptions {
    double weight_cutoff = 1e-10;     // drop modes with |beta_p| below this fraction of max |beta|
    double stability_tol = 1e-8;      // retained modes must satisfy Re(lambda) <= tol
    double imag_tol = 1e-8;
    std::optional<double> window;     // finite acquisition time t_H
};

/// Modal data for one LOF: retained modes, their LOF weights and second moments.
struct LofProjection {
    std::vector<std::size_t> modes;
    CVector beta;        // <alpha_L|v_p>
    CVector lambda;
    CMatrix moments;     // M_pq
    double norm_sq = 0;  // int |alpha|^2
    double goldstone_weight = 0.0;
};

inline LofProjection project_lof(const DsSolution& ds, const LinearOperator& op, const SpectralBasis& basis,
                                 const CVec& alpha, const ModalOptions& opts = {}) {
    LofProjection P;
    const GridPtr& grid = ds.grid();
    P.norm_sq = norm_squared(alpha, grid->spacing());
    if (!(P.norm_sq > 0.0))
        throw ConfigError("LOF has zero norm");
    const CVector a = op.to_coordinates(lof_vector(grid, alpha));
    const CVector all_beta = basis.right.adjoint() * a;  // conj(<alpha|v_p>)
    double bmax = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (static_cast<int>(i) != basis.goldstone_index)
            bmax = std::max(bmax, std::abs(all_beta(static_cast<Eigen::Index>(i))));
    if (basis.goldstone_index >= 0)
        P.goldstone_weight = std::abs(all_beta(basis.goldstone_index)) / std::sqrt(P.norm_sq);
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (static_cast<int>(i) == basis.goldstone_index)
            continue;
        if (std::abs(all_beta(static_cast<Eigen::Index>(i))) <= opts.weight_cutoff * bmax)
            continue;
        if (basis.eigenvalues[i].real() > opts.stability_tol) {
            std::ostringstream os;
            os << "LOF couples to unstable mode " << i << " (lambda = " << basis.eigenvalues[i] << ")";
            throw InstabilityError(os.str());
        }
        P.modes.push_back(i);
    }
    const auto K = static_cast<Eigen::Index>(P.modes.size());
    P.beta.resize(K);
    P.lambda.resize(K);
    for (Eigen::Index p = 0; p < K; ++p) {
        const auto i = static_cast<Eigen::Index>(P.modes[static_cast<std::size_t>(p)]);
        P.beta(p) = std::conj(all_beta(i));
        P.lambda(p) = basis.eigenvalues[static_cast<std::size_t>(i)];
    }
    const DiffusionMatrix D = diffusion_matrix(basis, op, P.modes);
    P.moments = modal_correlations(basis, D);
    return P;
}

/// S(omega) = 2 sum beta_p beta_q S_pq(omega) / int |alpha|^2, optionally over a finite window.
inline RVec spectrum_from_projection(const LofProjection& P, const RVec& omegas, const ModalOptions& opts = {}) {
    const auto K = static_cast<Eigen::Index>(P.modes.size());
    // Weighted moments B_pq = beta_p beta_q M_pq.
    CMatrix B(K, K);
    for (Eigen::Index p = 0; p < K; ++p)
        for (Eigen::Index q = 0; q < K; ++q)
            B(p, q) = P.beta(p) * P.beta(q) * P.moments(p, q);
    RVec out;
    out.reserve(omegas.size());
    const cplx i1(0.0, 1.0);
    for (double w : omegas) {
        CVector a(K), b(K);
        for (Eigen::Index p = 0; p < K; ++p) {
            const cplx lm = P.lambda(p) - i1 * w;  // forward lag
            const cplx lp = P.lambda(p) + i1 * w;  // backward lag
            if (opts.window) {
                const double T = 0.5 * *opts.window;
                a(p) = (std::exp(lm * T) - 1.0) / lm;
                b(p) = (std::exp(lp * T) - 1.0) / lp;
            } else {
                a(p) = -1.0 / lm;
                b(p) = -1.0 / lp;
            }
        }
        // sum_pq B_pq (a_p + b_q)
        const cplx s = (a.transpose() * B).sum() + (B * b).sum();
        const cplx S = 2.0 * s / P.norm_sq;
        if (std::abs(S.imag()) > opts.imag_tol * std::max(1.0, std::abs(S.real()))) {
            std::ostringstream os;
            os << "spectrum has imaginary residue " << S.imag() << " at omega = " << w;
            throw Error(os.str());
        }
        out.push_back(S.real());
    }
    return out;
}

inline SqueezingSpectrum squeezing_spectrum(const DsSolution& ds, const LinearOperator& op, const SpectralBasis& basis,
                                            const LofSpec& lof, const RVec& omegas, const ModalOptions& opts = {}) {
    const LofProjection P = project_lof(ds, op, basis, lof_field(ds, lof), opts);
    SqueezingSpectrum S;
    S.omegas = omegas;
    S.values = spectrum_from_projection(P, omegas, opts);
    S.lof = lof;
    S.method = SpectrumMethod::modal;
    S.window = opts.window;
    S.goldstone_weight = P.goldstone_weight;
    return S;
}

/// Normalised quadrature correlation C(tau) = <dE(t+tau) dE(t)> / int|alpha|^2 for tau >= 0.
inline RVec modal_correlation_function(const LofProjection& P, const RVec& taus) {
    RVec out;
    const auto K = static_cast<Eigen::Index>(P.modes.size());
    for (double tau : taus) {
        cplx s{};
        for (Eigen::Index p = 0; p < K; ++p) {
            const cplx e = std::exp(P.lambda(p) * std::abs(tau)) * P.beta(p);
            for (Eigen::Index q = 0; q < K; ++q)
                s += e * P.beta(q) * P.moments(p, q);
        }
        out.push_back(s.real() / P.norm_sq);
    }
    return out;
}

/// Ideal-LOF spectrum of C(tau) = -exp(-2|tau|)/2 integrated over |tau| < t_H/2.
inline double finite_window_value(double t_H, double omega) {
    if (!(t_H >= 0.0))
        throw ConfigError("acquisition time must be non-negative");
    if (std::isinf(t_H))
        return -4.0 / (4.0 + omega * omega);
    const double T = 0.5 * t_H;
    const double e = std::exp(-2.0 * T);
    return -2.0 * (e * (-2.0 * std::cos(omega * T) + omega * std::sin(omega * T)) + 2.0) / (4.0 + omega * omega);
}

inline SqueezingSpectrum finite_window_spectrum(double t_H, const RVec& omegas) {
    SqueezingSpectrum S;
    S.omegas = omegas;
    for (double w : omegas)
        S.values.push_back(finite_window_value(t_H, w));
    S.lof = LofSpec::adjoint_w2();
    S.method = SpectrumMethod::closed_form;
    if (!std::isinf(t_H))
        S.window = t_H;
    return S;
}

/// Everything needed for repeated modal evaluations over one background.
struct ModalContext {
    DsSolution ds;
    LinearOperator op;
    SpectralBasis basis;

    explicit ModalContext(const DsSolution& background, EigenOptions eo = {})
        : ds(background), op(background), basis(eigendecompose(op, eo)) {}

    SqueezingSpectrum spectrum(const LofSpec& lof, const RVec& omegas, const ModalOptions& mo = {}) const {
        return squeezing_spectrum(ds, op, basis, lof, omegas, mo);
    }
    double cs_width() const { return 1.0 / std::sqrt(ds.beta_sq); }
};

struct Figure1Data {
    RVec label_omegas;                      // omega values reported for each curve
    RVec xi_over_dx;                        // panel (a) abscissa
    std::vector<RVec> panel_a;              // [i_xi][i_omega]
    RVec xbar_over_dx;                      // panel (b) abscissa
    std::vector<RVec> panel_b_w2;           // [i_xbar][i_omega]
    std::vector<RVec> panel_b_gh;
    double gh_width_over_dx = 1.0;          // GH1 width used in panel (b)
};

struct Figure1Options {
    RVec label_omegas{0.0, 1.0, 2.0};
    RVec xi_over_dx;      // default: 41 log-spaced points in [0.05, 10]
    RVec xbar_over_dx;    // default: -0.3..0.3 in steps of 0.025
    double gh_width_over_dx = 1.0;
};

inline Figure1Data figure1_scan(const ModalContext& ctx, Figure1Options opts = {}) {
    if (opts.xi_over_dx.empty())
        for (int i = 0; i <= 40; ++i)
            opts.xi_over_dx.push_back(0.05 * std::pow(200.0, i / 40.0));
    if (opts.xbar_over_dx.empty())
        for (int i = -12; i <= 12; ++i)
            opts.xbar_over_dx.push_back(0.025 * i);
    const double dx = ctx.cs_width();
    Figure1Data d;
    d.label_omegas = opts.label_omegas;
    d.xi_over_dx = opts.xi_over_dx;
    d.xbar_over_dx = opts.xbar_over_dx;
    d.gh_width_over_dx = opts.gh_width_over_dx;
    for (double r : opts.xi_over_dx)
        d.panel_a.push_back(ctx.spectrum(LofSpec::gauss_hermite(r * dx), opts.label_omegas).values);
    for (double r : opts.xbar_over_dx) {
        d.panel_b_w2.push_back(ctx.spectrum(LofSpec::adjoint_w2(r * dx), opts.label_omegas).values);
        d.panel_b_gh.push_back(
            ctx.spectrum(LofSpec::gauss_hermite(opts.gh_width_over_dx * dx, r * dx), opts.label_omegas).values);
    }
    return d;
}

struct MispositionCorrection {
    double correction = 0.0;   // change of S(0) at <rho^2> = D t_d
    double rho_sq_over_dx2 = 0.0;
    double curvature = 0.0;    // d^2 S(0) / d xbar^2 at xbar = 0
};

/// Second-order S(0) degradation for a mispositioned LOF with <rho^2> = D t_d.
inline MispositionCorrection misposition_correction(const ModalContext& ctx, double diffusion, double t_d,
                                                    const LofSpec& lof = LofSpec::adjoint_w2(), double h = 0.0) {
    if (!(t_d >= 0.0) || !(diffusion >= 0.0))
        throw ConfigError("delay and diffusion constant must be non-negative");
    const double dx = ctx.cs_width();
    if (h <= 0.0)
        h = 0.02 * dx;
    const RVec w0{0.0};
    auto at = [&](double xbar) {
        LofSpec l = lof;
        l.offset = xbar;
        return ctx.spectrum(l, w0).values[0];
    };
    MispositionCorrection c;
    c.curvature = (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
    const double rho2 = diffusion * t_d;
    // <S(rho)> = S(0) + S''(0) <rho^2> / 2 for an isotropic (1D symmetric) displacement.
    c.correction = 0.5 * c.curvature * rho2;
    c.rho_sq_over_dx2 = rho2 / (dx * dx);
    return c;
}

/// Correction for a given <rho^2>/Delta x^2 directly.
inline double misposition_correction_for_ratio(const ModalContext& ctx, double rho_sq_over_dx2,
                                               const LofSpec& lof = LofSpec::adjoint_w2()) {
    const double dx = ctx.cs_width();
    const MispositionCorrection c = misposition_correction(ctx, 1.0, 0.0, lof);
    return 0.5 * c.curvature * rho_sq_over_dx2 * dx * dx;
}

inline void write_spectrum_csv(std::ostream& os, const SqueezingSpectrum& s) {
    os << std::setprecision(12);
    os << "# method=" << to_string(s.method) << " lof=" << s.lof.label() << " window=";
    if (s.window) os << *s.window; else os << "inf";
    os << " units=omega/gamma1\n";
    const bool se = !s.std_errors.empty();
    os << (se ? "omega,S,std_error\n" : "omega,S\n");
    for (std::size_t i = 0; i < s.omegas.size(); ++i) {
        os << s.omegas[i] << "," << s.values[i];
        if (se) os << "," << s.std_errors[i];
        os << "\n";
    }
}

} // namespace dopo
