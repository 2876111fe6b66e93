#pragma once

// Trajectory ensembles: simulated balanced-homodyne records, position tracking,
// and the Monte-Carlo estimators built on them. Each trajectory is reduced to
// small partial statistics which are merged in trajectory order, so results do
// not depend on the number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dopo/error.hpp"
#include "dopo/positive_p.hpp"
#include "dopo/squeezing.hpp"

namespace dopo {

/// Run fn(i) for i in [0, n) on `threads` workers. fn receives (i, worker).
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, int)>& fn) {
    threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i, 0);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i, w);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);
}

struct DetectorSpec {
    std::string name;
    LofSpec lof;
    TrackingMode mode = TrackingMode::tracked_lof;
    double delay = 0.0;       // t_d, tracked mode only
    double lag_window = 5.0;  // largest correlation lag kept
};

struct EnsembleConfig {
    SimConfig sim;
    double burn_in = 10.0;          // discarded before the homodyne record starts
    double sample_interval = 0.05;  // record spacing (a multiple of dt)
    std::vector<DetectorSpec> detectors;
    bool photon_density = false;
    int threads = 1;

    std::uint64_t steps_per_sample() const {
        return static_cast<std::uint64_t>(std::llround(sample_interval / sim.dt));
    }
    std::size_t n_samples() const {
        return static_cast<std::size_t>(std::floor(sim.t_end / sample_interval + 1e-9));
    }
    std::size_t burn_in_samples() const {
        return static_cast<std::size_t>(std::llround(burn_in / sample_interval));
    }
    void validate() const {
        sim.validate();
        const double r = sample_interval / sim.dt;
        if (!(sample_interval > 0.0) || std::abs(r - std::round(r)) > 1e-9 || r < 1.0)
            throw ConfigError("sample_interval must be a positive multiple of dt");
        if (!(burn_in >= 0.0) || burn_in >= sim.t_end)
            throw ConfigError("burn_in must lie in [0, t_end)");
        for (const auto& d : detectors) {
            if (!(d.lag_window > 0.0))
                throw ConfigError("detector lag window must be positive");
            if (d.lag_window >= sim.t_end - burn_in)
                throw ConfigError("detector lag window exceeds the record length");
            if (d.delay < 0.0)
                throw ConfigError("tracking delay must be non-negative");
        }
    }
};

/// Partial statistics of one trajectory.
struct TrajectoryResult {
    bool excluded = false;
    std::string reason;
    std::vector<RVec> correlations;  // per detector: Re C(tau_m), m = 0..K
    RVec positions;                  // r1 at every sample time, from t = 0
    RVec density;                    // time-averaged Re(f+ f) kappa^2
    std::uint64_t branch_flips = 0;
};

struct EnsembleResult {
    EnsembleConfig config;
    std::vector<TrajectoryResult> trajectories;
    RVec sample_times;

    std::size_t survivors() const {
        return static_cast<std::size_t>(
            std::count_if(trajectories.begin(), trajectories.end(), [](auto& t) { return !t.excluded; }));
    }
    double excluded_fraction() const {
        return trajectories.empty() ? 0.0 : 1.0 - static_cast<double>(survivors()) / trajectories.size();
    }
    std::uint64_t branch_flips() const {
        std::uint64_t s = 0;
        for (auto& t : trajectories)
            s += t.branch_flips;
        return s;
    }
};

namespace detail {

struct DetectorKernel {
    CVec p1, p2;  // weights applied to the spectra of f and f+
    CVec q;       // the same applied to the classical structure
    std::size_t lags = 0;
    std::size_t delay_samples = 0;
    TrackingMode mode = TrackingMode::tracked_lof;
};

inline DetectorKernel make_kernel(const DsSolution& ds, const SpectralOps& ops, const DetectorSpec& d,
                                  double kappa, double sample_interval) {
    LofSpec centred = d.lof;
    const CVec alpha = lof_field(ds, centred);
    const double nrm = std::sqrt(norm_squared(alpha, ds.grid()->spacing()));
    if (!(nrm > 0.0))
        throw ConfigError("detector LOF has zero norm");
    CVec ac(alpha.size());
    for (std::size_t j = 0; j < alpha.size(); ++j)
        ac[j] = std::conj(alpha[j]);
    const CVec A = ops.spectrum(alpha), C = ops.spectrum(ac);
    const CVec f = ds.field();
    CVec fc(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        fc[j] = std::conj(f[j]);
    const CVec F1 = ops.spectrum(f), F2 = ops.spectrum(fc);
    const std::size_t n = ops.size();
    const double c = kappa * ds.grid()->spacing() / static_cast<double>(n) / nrm;
    DetectorKernel k;
    k.p1.resize(n);
    k.p2.resize(n);
    k.q.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        k.p1[j] = c * std::conj(A[j]);
        k.p2[j] = c * std::conj(C[j]);
        k.q[j] = k.p1[j] * F1[j] + k.p2[j] * F2[j];
    }
    k.p1[n / 2] = k.p2[n / 2] = k.q[n / 2] = 0.0;
    k.lags = static_cast<std::size_t>(std::llround(d.lag_window / sample_interval));
    k.delay_samples = static_cast<std::size_t>(std::llround(d.delay / sample_interval));
    k.mode = d.mode;
    return k;
}

inline void phases(const Grid1D& g, double r, CVec& out) {
    const auto& k = g.wavenumbers();
    out.resize(k.size());
    for (std::size_t j = 0; j < k.size(); ++j)
        out[j] = std::polar(1.0, k[j] * r);
}

} // namespace detail

/// Homodyne value <alpha_L(x - r_L)|a> / |alpha_L| with a = kappa (f - fbar(x - r1)),
/// evaluated on the spectra. ph_L = e^{i k r_L}, ph_d = e^{i k (r_L - r1)}.
inline cplx homodyne_value(const detail::DetectorKernel& k, const TrajectoryState& s, const CVec& ph_L,
                           const CVec& ph_d) {
    cplx acc{};
    for (std::size_t j = 0; j < k.p1.size(); ++j)
        acc += ph_L[j] * (k.p1[j] * s.s1[j] + k.p2[j] * s.s2[j]) - ph_d[j] * k.q[j];
    return acc;
}

/// Integrate the ensemble around the stationary structure `ds` (centred at x = 0).
inline EnsembleResult run_ensemble(const DsSolution& ds, const EnsembleConfig& cfg) {
    cfg.validate();
    require_same_grid(ds.grid(), cfg.sim.grid);
    if (cfg.sim.params.sigma != ds.params.sigma || cfg.sim.params.mu != ds.params.mu ||
        cfg.sim.params.delta1 != ds.params.delta1)
        throw ConfigError("simulation parameters differ from those of the stationary structure");

    const Integrator integ(cfg.sim);
    const Grid1D& grid = *cfg.sim.grid;
    std::vector<detail::DetectorKernel> kernels;
    for (const auto& d : cfg.detectors)
        kernels.push_back(detail::make_kernel(ds, integ.ops(), d, cfg.sim.params.kappa, cfg.sample_interval));

    const std::size_t S = cfg.n_samples();
    const std::size_t B = cfg.burn_in_samples();
    const std::uint64_t sps = cfg.steps_per_sample();
    const bool localized = ds.kind == DsKind::localized;
    const double kappa2 = std::isinf(cfg.sim.params.kappa) ? 1.0 : cfg.sim.params.kappa * cfg.sim.params.kappa;
    double r_classical = 0.0;
    if (localized) {
        const CVec f = ds.field();
        CVec fc(f.size());
        for (std::size_t j = 0; j < f.size(); ++j)
            fc[j] = std::conj(f[j]);
        r_classical = track_position(grid, f, fc, 0.0);
    }

    EnsembleResult res;
    res.config = cfg;
    res.trajectories.resize(static_cast<std::size_t>(cfg.sim.n_trajectories));
    for (std::size_t i = 0; i <= S; ++i)
        res.sample_times.push_back(static_cast<double>(i) * cfg.sample_interval);

    std::vector<Integrator::Workspace> work;
    for (int w = 0; w < std::max(1, cfg.threads); ++w)
        work.push_back(integ.make_workspace());

    parallel_for(res.trajectories.size(), cfg.threads, [&](std::size_t ti, int worker) {
        auto& out = res.trajectories[ti];
        auto& ws = work[static_cast<std::size_t>(worker)];
        TrajectoryState st = integ.initial_state(ds, static_cast<std::uint32_t>(ti));
        std::vector<CVec> records(kernels.size());
        out.positions.assign(S + 1, 0.0);
        if (cfg.photon_density)
            out.density.assign(grid.n_points(), 0.0);
        CVec ph_L, ph_d;
        double r_static = 0.0;
        try {
            for (std::size_t i = 0; i <= S; ++i) {
                if (i > 0 && !integ.advance(st, sps, ws)) {
                    out.excluded = true;
                    out.reason = "diverged";
                    break;
                }
                const CVec f = fft::inverse(st.s1), fp = fft::inverse(st.s2);
                double r1 = 0.0;
                if (localized) {
                    r1 = track_position(grid, f, fp, i == 0 ? r_classical : out.positions[i - 1]) - r_classical;
                    st.position = r1;
                }
                out.positions[i] = r1;
                if (i < B)
                    continue;
                if (i == B)
                    r_static = r1;
                if (cfg.photon_density)
                    for (std::size_t j = 0; j < f.size(); ++j)
                        out.density[j] += (fp[j] * f[j]).real() * kappa2;
                for (std::size_t d = 0; d < kernels.size(); ++d) {
                    const auto& k = kernels[d];
                    double rL = r_static;
                    if (k.mode == TrackingMode::tracked_lof)
                        rL = out.positions[i >= k.delay_samples ? i - k.delay_samples : 0];
                    detail::phases(grid, rL, ph_L);
                    detail::phases(grid, rL - r1, ph_d);
                    records[d].push_back(homodyne_value(k, st, ph_L, ph_d));
                }
            }
        } catch (const TrackingError& e) {
            out.excluded = true;
            out.reason = e.what();
        }
        out.branch_flips = st.branch_flips;
        if (out.excluded)
            return;
        if (cfg.photon_density)
            for (auto& v : out.density)
                v /= static_cast<double>(S + 1 - B);
        out.correlations.resize(kernels.size());
        for (std::size_t d = 0; d < kernels.size(); ++d) {
            const CVec& e = records[d];
            const std::size_t K = kernels[d].lags;
            RVec C(K + 1, 0.0);
            for (std::size_t m = 0; m <= K; ++m) {
                cplx acc{};
                for (std::size_t t = 0; t + m < e.size(); ++t)
                    acc += e[t + m] * e[t];
                C[m] = acc.real() / static_cast<double>(e.size() - m);
            }
            out.correlations[d] = std::move(C);
        }
    });
    return res;
}

// --- estimators --------------------------------------------------------------------

struct CorrelationEstimate {
    RVec taus;
    RVec values;
    RVec std_errors;
    std::size_t trajectories = 0;
};

namespace detail {

inline void require_survivors(const EnsembleResult& r, std::size_t minimum = 2) {
    if (r.survivors() < minimum) {
        std::ostringstream os;
        os << "only " << r.survivors() << " surviving trajectories (need " << minimum << ")";
        throw StatisticsError(os.str());
    }
}

/// Mean and standard error of per-trajectory samples.
inline std::pair<double, double> mean_se(const RVec& x) {
    const double n = static_cast<double>(x.size());
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double v = 0.0;
    for (double y : x)
        v += (y - m) * (y - m);
    v /= std::max(1.0, n - 1.0);
    return {m, std::sqrt(v / n)};
}

} // namespace detail

inline CorrelationEstimate correlation_estimate(const EnsembleResult& r, std::size_t detector) {
    detail::require_survivors(r);
    CorrelationEstimate c;
    std::size_t K = 0;
    for (auto& t : r.trajectories)
        if (!t.excluded) {
            K = t.correlations.at(detector).size();
            break;
        }
    for (std::size_t m = 0; m < K; ++m) {
        RVec x;
        for (auto& t : r.trajectories)
            if (!t.excluded)
                x.push_back(t.correlations[detector][m]);
        const auto [mean, se] = detail::mean_se(x);
        c.taus.push_back(static_cast<double>(m) * r.config.sample_interval);
        c.values.push_back(mean);
        c.std_errors.push_back(se);
        c.trajectories = x.size();
    }
    return c;
}

/// Monte-Carlo S(omega) = 2 int_{-T}^{T} C(tau) e^{-i omega tau} d tau by the trapezoid rule,
/// with T the detector lag window (or a shorter `window_half`), errors from trajectory variance.
inline SqueezingSpectrum spectrum_estimate(const EnsembleResult& r, std::size_t detector, const RVec& omegas,
                                           std::optional<double> window_half = std::nullopt) {
    detail::require_survivors(r);
    const double h = r.config.sample_interval;
    const DetectorSpec& spec = r.config.detectors.at(detector);
    std::size_t K = static_cast<std::size_t>(std::llround(spec.lag_window / h));
    if (window_half)
        K = std::min(K, static_cast<std::size_t>(std::llround(*window_half / h)));
    SqueezingSpectrum S;
    S.omegas = omegas;
    S.lof = spec.lof;
    S.method = SpectrumMethod::monte_carlo;
    S.window = 2.0 * static_cast<double>(K) * h;
    for (double w : omegas) {
        RVec x;
        for (auto& t : r.trajectories) {
            if (t.excluded)
                continue;
            const RVec& C = t.correlations[detector];
            double s = C[0];
            for (std::size_t m = 1; m <= K; ++m)
                s += (m == K ? 1.0 : 2.0) * C[m] * std::cos(w * static_cast<double>(m) * h);
            x.push_back(2.0 * h * s);
        }
        const auto [mean, se] = detail::mean_se(x);
        S.values.push_back(mean);
        S.std_errors.push_back(se);
    }
    return S;
}

struct MsdCurve {
    RVec times;
    RVec msd;
    RVec std_errors;
};

inline MsdCurve mean_square_displacement(const EnsembleResult& r) {
    detail::require_survivors(r);
    MsdCurve c;
    for (std::size_t i = 0; i < r.sample_times.size(); ++i) {
        RVec x;
        for (auto& t : r.trajectories)
            if (!t.excluded) {
                const double d = t.positions[i] - t.positions[0];
                x.push_back(d * d);
            }
        const auto [m, se] = detail::mean_se(x);
        c.times.push_back(r.sample_times[i]);
        c.msd.push_back(m);
        c.std_errors.push_back(se);
    }
    return c;
}

struct DiffusionFit {
    double D = 0.0;          // MSD = intercept + D t
    double std_error = 0.0;  // from the spread of per-trajectory slopes
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t trajectories = 0;
    bool linear() const { return r_squared > 0.99; }
};

/// Least-squares slope of the ensemble MSD over [t_min, t_max].
inline DiffusionFit diffusion_constant(const EnsembleResult& r, double t_min = 5.0,
                                       std::optional<double> t_max = std::nullopt) {
    detail::require_survivors(r);
    const double hi = t_max.value_or(r.sample_times.back());
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < r.sample_times.size(); ++i)
        if (r.sample_times[i] >= t_min - 1e-12 && r.sample_times[i] <= hi + 1e-12)
            idx.push_back(i);
    if (idx.size() < 3)
        throw StatisticsError("MSD fit window contains fewer than 3 samples");
    double tm = 0.0;
    for (auto i : idx)
        tm += r.sample_times[i];
    tm /= static_cast<double>(idx.size());
    double stt = 0.0;
    for (auto i : idx)
        stt += (r.sample_times[i] - tm) * (r.sample_times[i] - tm);
    // slope = sum c_i y_i, linear in y so it can be applied per trajectory
    RVec c;
    for (auto i : idx)
        c.push_back((r.sample_times[i] - tm) / stt);
    RVec slopes;
    for (auto& t : r.trajectories) {
        if (t.excluded)
            continue;
        double s = 0.0;
        for (std::size_t a = 0; a < idx.size(); ++a) {
            const double d = t.positions[idx[a]] - t.positions[0];
            s += c[a] * d * d;
        }
        slopes.push_back(s);
    }
    const MsdCurve msd = mean_square_displacement(r);
    DiffusionFit fit;
    double ym = 0.0;
    for (auto i : idx)
        ym += msd.msd[i];
    ym /= static_cast<double>(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        fit.D += c[a] * msd.msd[idx[a]];
    fit.intercept = ym - fit.D * tm;
    double ss_res = 0.0, ss_tot = 0.0;
    for (auto i : idx) {
        const double e = msd.msd[i] - (fit.intercept + fit.D * r.sample_times[i]);
        ss_res += e * e;
        ss_tot += (msd.msd[i] - ym) * (msd.msd[i] - ym);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    fit.std_error = detail::mean_se(slopes).second;
    fit.trajectories = slopes.size();
    return fit;
}

/// N1(x) = kappa^2 <f+ f>, averaged over surviving trajectories and record time.
inline RealField photon_density(const EnsembleResult& r) {
    detail::require_survivors(r, 1);
    if (!r.config.photon_density)
        throw ConfigError("ensemble was run without photon-density accumulation");
    RealField out = RealField::zeros(r.config.sim.grid);
    std::size_t n = 0;
    for (auto& t : r.trajectories) {
        if (t.excluded)
            continue;
        for (std::size_t j = 0; j < t.density.size(); ++j)
            out.values[j] += t.density[j];
        ++n;
    }
    for (auto& v : out.values)
        v /= static_cast<double>(n);
    return out;
}

/// Position diffusion constant predicted by the Goldstone-mode noise,
/// D = kappa^-2 * D_GG e^{2i phi} / |G|^2, returned as the kappa-independent coefficient D kappa^2.
inline double goldstone_diffusion_coefficient(const ModalContext& ctx) {
    if (ctx.basis.goldstone_index < 0)
        throw ConfigError("background has no Goldstone mode");
    const auto g = static_cast<std::size_t>(ctx.basis.goldstone_index);
    const DiffusionMatrix D = diffusion_matrix(ctx.basis, ctx.op, {g});
    const FluctuationField G = goldstone_field(ctx.ds);
    const CVector gc = ctx.op.to_coordinates(G);
    // v_G = e^{i phi} G / |G|
    const cplx phase = ctx.basis.right.col(static_cast<Eigen::Index>(g)).dot(gc) / gc.norm();
    const cplx e2 = std::conj(phase) * std::conj(phase);
    return (D.entries(0, 0) * e2).real() / gc.squaredNorm();
}

} // namespace dopo
