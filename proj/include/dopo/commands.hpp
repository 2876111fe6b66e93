#pragma once

// Subcommands of the command-line front-end. Each takes a validated RunConfig,
// writes its files into config.output and returns the files written.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "dopo/ensemble.hpp"
#include "dopo/run_config.hpp"
#include "dopo/spectral_basis.hpp"
#include "dopo/squeezing.hpp"
#include "dopo/stationary.hpp"

namespace dopo {

struct CommandResult {
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
    int exit_code = 0;
};

namespace detail {

class OutputDir {
public:
    OutputDir(const std::string& dir, CommandResult& r) : dir_(dir), r_(r) {
        std::filesystem::create_directories(dir_);
    }

    std::ofstream open(const std::string& name) {
        std::ofstream os(dir_ / name);
        if (!os)
            throw ConfigError("cannot write " + (dir_ / name).string());
        r_.outputs.push_back(name);
        return os;
    }

private:
    std::filesystem::path dir_;
    CommandResult& r_;
};

inline void warn(CommandResult& r, std::ostream& log, const std::string& msg) {
    r.warnings.push_back(msg);
    log << "warning: " << msg << "\n";
}

inline int worker_count(const RunConfig& c) {
    if (c.threads > 0)
        return c.threads;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

inline void print_units(std::ostream& os, const ReducedParams& p) {
    os << "# units: time 1/gamma1, length l1, field scaled by 1/kappa (gamma1=" << p.gamma1 << " l1=" << p.l1
       << " kappa=" << p.kappa << ")\n";
}

inline LofSpec make_lof(const LofConfig& l, double dx) {
    if (l.kind == "w2")
        return LofSpec::adjoint_w2(l.offset_over_dx * dx);
    return LofSpec::gauss_hermite(l.width_over_dx * dx, l.offset_over_dx * dx);
}

inline EigenOptions eigen_options(const RunConfig& c) {
    EigenOptions eo;
    eo.require_stable = c.require_stable;
    return eo;
}

inline EnsembleConfig ensemble_config(const RunConfig& c, const SimulationConfig& s, double kappa) {
    EnsembleConfig e;
    e.sim.params = c.model;
    e.sim.params.kappa = kappa;
    e.sim.grid = c.grid();
    e.sim.dt = s.dt;
    e.sim.t_end = s.t_end;
    e.sim.n_trajectories = s.n_trajectories;
    e.sim.seed = c.seed;
    e.sim.divergence_factor = s.divergence_factor;
    e.burn_in = s.burn_in;
    e.sample_interval = s.sample_interval;
    e.threads = worker_count(c);
    return e;
}

} // namespace detail

/// Stationary background described by the solver block.
inline DsSolution solve_background(const RunConfig& c) {
    const GridPtr grid = c.grid();
    NewtonOptions no;
    no.max_iter = c.solver.max_iter;
    no.tolerance = c.solver.tolerance;
    if (c.solver.initial == "zero")
        return trivial_solution(c.model, grid);
    if (c.solver.initial == "homogeneous")
        return homogeneous_solution(c.model, grid);
    RealField guess;
    if (c.solver.initial == "file") {
        std::ifstream is(c.solver.profile);
        if (!is)
            throw ConfigError("cannot open profile " + c.solver.profile);
        const DsSolution stored = read_ds_csv(is);
        if (stored.params.sigma != c.model.sigma || stored.params.mu != c.model.mu ||
            stored.params.delta1 != c.model.delta1)
            throw ConfigError("stored profile was computed for different model parameters");
        require_same_grid(stored.grid(), grid);
        guess = RealField{grid, stored.profile.values};
    } else {
        guess = bright_soliton(c.model, grid).profile;
    }
    for (auto& v : guess.values)
        v *= c.solver.guess_scale;
    DsSolution ds = newton_stationary(c.model, grid, guess, no);
    ds.params.kappa = c.model.kappa;
    return ds;
}

inline CommandResult cmd_solve_ds(const RunConfig& c, std::ostream& log) {
    CommandResult r;
    detail::OutputDir out(c.output, r);
    const DsSolution ds = solve_background(c);
    {
        auto os = out.open("ds.csv");
        write_ds_csv(os, ds);
    }
    log << std::setprecision(10) << "kind      " << to_string(ds.kind) << "\n"
        << "beta^2    " << ds.beta_sq << "\n"
        << "theta     " << ds.theta << "\n"
        << "residual  " << std::scientific << std::setprecision(3) << ds.residual << std::defaultfloat << "\n"
        << "newton    " << ds.iterations << " iterations\n";
    return r;
}

inline CommandResult cmd_spectrum(const RunConfig& c, std::ostream& log) {
    CommandResult r;
    detail::OutputDir out(c.output, r);
    const DsSolution ds = solve_background(c);
    const LinearOperator op(ds);
    const SpectralBasis basis = eigendecompose(op, detail::eigen_options(c));
    const UniversalModeReport rep = verify_universal_modes(op, &basis);
    {
        auto os = out.open("spectrum.csv");
        write_spectrum_csv(os, basis);
    }
    {
        auto os = out.open("universal_modes.txt");
        write_report(os, rep);
        os << std::scientific << std::setprecision(3) << "biorthogonality error " << basis.biorthogonality_error
           << "\nmax Re(lambda)        " << basis.max_real_part << "\n";
    }
    write_report(log, rep);
    log << "modes " << basis.size() << ", max Re(lambda) " << basis.max_real_part << "\n";
    if (rep.applicable && !rep.passed())
        detail::warn(r, log, "universal-mode residuals exceed tolerance");
    return r;
}

namespace detail {

inline void write_agreement(std::ostream& os, const std::vector<SqueezingSpectrum>& modal,
                            const std::vector<SqueezingSpectrum>& mc, double& worst) {
    os << std::setprecision(10) << "lof,omega,modal,monte_carlo,std_error,z\n";
    worst = 0.0;
    for (std::size_t i = 0; i < modal.size(); ++i)
        for (std::size_t k = 0; k < modal[i].omegas.size(); ++k) {
            const double se = mc[i].std_errors[k];
            const double z = se > 0.0 ? std::abs(mc[i].values[k] - modal[i].values[k]) / se : 0.0;
            worst = std::max(worst, z);
            os << modal[i].lof.label() << "," << modal[i].omegas[k] << "," << modal[i].values[k] << ","
               << mc[i].values[k] << "," << se << "," << z << "\n";
        }
}

inline void write_squeeze_plot(std::ostream& os, std::size_t n_lofs, bool modal, bool mc) {
    os << "import numpy as np\nimport matplotlib.pyplot as plt\n\n"
       << "fig, ax = plt.subplots()\n";
    for (std::size_t i = 0; i < n_lofs; ++i) {
        if (modal)
            os << "d = np.loadtxt('squeeze_modal_" << i << ".csv', delimiter=',', skiprows=2, ndmin=2)\n"
               << "ax.plot(d[:, 0], d[:, 1], label='modal " << i << "')\n";
        if (mc)
            os << "d = np.loadtxt('squeeze_mc_" << i << ".csv', delimiter=',', skiprows=2, ndmin=2)\n"
               << "ax.errorbar(d[:, 0], d[:, 1], yerr=d[:, 2], fmt='o', label='Monte Carlo " << i << "')\n";
    }
    os << "ax.set_xscale('symlog', linthresh=0.1)\n"
       << "ax.set_xlabel(r'$\\omega/\\gamma_1$')\nax.set_ylabel(r'$S(\\omega)$')\nax.legend()\n"
       << "fig.savefig('squeeze.png', dpi=150)\n";
}

} // namespace detail

inline CommandResult cmd_squeeze(const RunConfig& c, std::ostream& log) {
    CommandResult r;
    detail::OutputDir out(c.output, r);
    const bool modal = c.squeeze.method != "monte_carlo";
    const bool mc = c.squeeze.method != "modal";
    const DsSolution ds = solve_background(c);
    const double dx = ds.trivial() ? 1.0 : 1.0 / std::sqrt(ds.beta_sq);
    RVec omegas = c.squeeze.omegas;
    if (omegas.empty())
        omegas = mc ? RVec{0.0, 0.5, 1.0, 2.0, 5.0} : default_omegas();

    std::vector<SqueezingSpectrum> modal_s, mc_s;
    if (modal) {
        const ModalContext ctx(ds, detail::eigen_options(c));
        ModalOptions mo;
        mo.window = c.squeeze.window;
        for (std::size_t i = 0; i < c.squeeze.lofs.size(); ++i) {
            modal_s.push_back(ctx.spectrum(detail::make_lof(c.squeeze.lofs[i], dx), omegas, mo));
            auto os = out.open("squeeze_modal_" + std::to_string(i) + ".csv");
            write_spectrum_csv(os, modal_s.back());
            log << "modal " << modal_s.back().lof.label() << ": S(" << omegas[0] << ") = " << std::setprecision(8)
                << modal_s.back().values[0] << "\n";
        }
    }
    if (mc) {
        EnsembleConfig ec = detail::ensemble_config(c, c.simulation, c.model.kappa);
        for (const auto& l : c.squeeze.lofs) {
            DetectorSpec d;
            d.lof = detail::make_lof(l, dx);
            d.name = d.lof.label();
            d.mode = l.mode == "static" ? TrackingMode::static_lof : TrackingMode::tracked_lof;
            d.delay = l.delay;
            d.lag_window = c.simulation.lag_window;
            ec.detectors.push_back(d);
        }
        const EnsembleResult res = run_ensemble(ds, ec);
        log << "trajectories " << res.survivors() << "/" << res.trajectories.size() << " survived (excluded fraction "
            << res.excluded_fraction() << ")\n";
        const std::optional<double> half =
            c.squeeze.window ? std::optional<double>(0.5 * *c.squeeze.window) : std::nullopt;
        double worst_se = 0.0;
        for (std::size_t i = 0; i < ec.detectors.size(); ++i) {
            mc_s.push_back(spectrum_estimate(res, i, omegas, half));
            for (double se : mc_s.back().std_errors)
                worst_se = std::max(worst_se, se);
            {
                auto os = out.open("squeeze_mc_" + std::to_string(i) + ".csv");
                write_spectrum_csv(os, mc_s.back());
            }
            const CorrelationEstimate ce = correlation_estimate(res, i);
            auto os = out.open("correlation_" + std::to_string(i) + ".csv");
            os << std::setprecision(12) << "# lof=" << ec.detectors[i].name << " units=tau*gamma1\n"
               << "tau,C,std_error\n";
            for (std::size_t k = 0; k < ce.taus.size(); ++k)
                os << ce.taus[k] << "," << ce.values[k] << "," << ce.std_errors[k] << "\n";
            log << "monte_carlo " << ec.detectors[i].name << ": S(" << omegas[0] << ") = " << mc_s.back().values[0]
                << " +- " << mc_s.back().std_errors[0] << "\n";
        }
        if (res.survivors() < 100 || worst_se > 0.05)
            detail::warn(r, log,
                         "standard errors too large for acceptance (" + std::to_string(res.survivors()) +
                             " trajectories, largest standard error " + std::to_string(worst_se) + ")");
        if (res.excluded_fraction() > 0.01)
            detail::warn(r, log, "more than 1% of trajectories diverged or lost tracking");
    }
    if (modal && mc) {
        double worst = 0.0;
        {
            auto os = out.open("agreement.csv");
            detail::write_agreement(os, modal_s, mc_s, worst);
        }
        log << "agreement: largest |z| = " << worst << "\n";
        if (!(worst < 3.0)) {
            detail::warn(r, log, "modal and Monte-Carlo spectra disagree by 3 standard errors or more");
            r.exit_code = static_cast<int>(ExitCode::statistics);
        }
    }
    {
        auto os = out.open("plot_squeeze.py");
        detail::write_squeeze_plot(os, c.squeeze.lofs.size(), modal, mc);
    }
    return r;
}

inline CommandResult cmd_figure1(const RunConfig& c, std::ostream& log) {
    CommandResult r;
    detail::OutputDir out(c.output, r);
    const DsSolution ds = solve_background(c);
    const ModalContext ctx(ds, detail::eigen_options(c));
    Figure1Options fo;
    fo.label_omegas = c.figure1.label_omegas;
    fo.gh_width_over_dx = c.figure1.gh_width_over_dx;
    const Figure1Data d = figure1_scan(ctx, fo);
    const double dx = ctx.cs_width();
    {
        auto os = out.open("figure1_a.csv");
        os << std::setprecision(12) << "# Gauss-Hermite LOF width scan, Delta x = 1/beta = " << dx << "\n"
           << "xi_over_dx";
        for (double w : d.label_omegas)
            os << ",S_omega_" << w;
        os << "\n";
        for (std::size_t i = 0; i < d.xi_over_dx.size(); ++i) {
            os << d.xi_over_dx[i];
            for (double v : d.panel_a[i])
                os << "," << v;
            os << "\n";
        }
    }
    {
        auto os = out.open("figure1_b.csv");
        os << std::setprecision(12) << "# LOF offset scan, Delta x = " << dx << ", gh1 width " << d.gh_width_over_dx
           << " Delta x\nxbar_over_dx";
        for (double w : d.label_omegas)
            os << ",w2_omega_" << w;
        for (double w : d.label_omegas)
            os << ",gh1_omega_" << w;
        os << "\n";
        for (std::size_t i = 0; i < d.xbar_over_dx.size(); ++i) {
            os << d.xbar_over_dx[i];
            for (double v : d.panel_b_w2[i])
                os << "," << v;
            for (double v : d.panel_b_gh[i])
                os << "," << v;
            os << "\n";
        }
    }
    {
        const std::size_t m = d.label_omegas.size();
        auto os = out.open("plot_figure1.py");
        os << "import numpy as np\nimport matplotlib.pyplot as plt\n\n"
           << "a = np.loadtxt('figure1_a.csv', delimiter=',', skiprows=2)\n"
           << "b = np.loadtxt('figure1_b.csv', delimiter=',', skiprows=2)\n"
           << "omegas = [";
        for (std::size_t k = 0; k < m; ++k)
            os << (k ? ", " : "") << d.label_omegas[k];
        os << "]\nfig, (pa, pb) = plt.subplots(1, 2, figsize=(10, 4))\n"
           << "for k, w in enumerate(omegas):\n"
           << "    pa.plot(a[:, 0], a[:, 1 + k], label=rf'$\\omega={w}\\gamma_1$')\n"
           << "    pb.plot(b[:, 0], b[:, 1 + k], '-', label=rf'$w_2$, $\\omega={w}\\gamma_1$')\n"
           << "    pb.plot(b[:, 0], b[:, 1 + " << m << " + k], '--', label=rf'GH$_1$, $\\omega={w}\\gamma_1$')\n"
           << "pa.set_xscale('log')\npa.set_xlabel(r'$\\xi/\\Delta x$')\npa.set_ylabel(r'$S$')\npa.legend()\n"
           << "pb.set_xlabel(r'$\\bar{x}/\\Delta x$')\npb.set_ylabel(r'$S$')\npb.legend(fontsize=7)\n"
           << "fig.tight_layout()\nfig.savefig('figure1.png', dpi=150)\n";
    }
    std::size_t imin = 0;
    for (std::size_t i = 0; i < d.panel_a.size(); ++i)
        if (d.panel_a[i][0] < d.panel_a[imin][0])
            imin = i;
    log << std::setprecision(6) << "panel (a): minimum S(" << d.label_omegas[0] << ") = " << d.panel_a[imin][0]
        << " at xi = " << d.xi_over_dx[imin] << " Delta x\n";
    const LofSpec w2 = LofSpec::adjoint_w2(0.15 * dx);
    const LofSpec gh = LofSpec::gauss_hermite(fo.gh_width_over_dx * dx, 0.15 * dx);
    log << "panel (b): S(0) at xbar = 0.15 Delta x: w2 " << ctx.spectrum(w2, {0.0}).values[0] << ", gh1 "
        << ctx.spectrum(gh, {0.0}).values[0] << "\n";
    return r;
}

inline CommandResult cmd_diffusion(const RunConfig& c, std::ostream& log) {
    CommandResult r;
    detail::OutputDir out(c.output, r);
    const DsSolution ds = solve_background(c);
    if (ds.kind != DsKind::localized)
        throw ConfigError("position diffusion needs a localized structure");
    const ModalContext ctx(ds, detail::eigen_options(c));
    const double coeff = goldstone_diffusion_coefficient(ctx);
    std::vector<DiffusionFit> fits;
    for (std::size_t i = 0; i < c.diffusion.kappas.size(); ++i) {
        const double kappa = c.diffusion.kappas[i];
        const EnsembleConfig ec = detail::ensemble_config(c, c.diffusion.simulation, kappa);
        const EnsembleResult res = run_ensemble(ds, ec);
        const MsdCurve msd = mean_square_displacement(res);
        {
            auto os = out.open("msd_" + std::to_string(i) + ".csv");
            os << std::setprecision(12) << "# kappa=" << kappa << " units=t*gamma1,length^2/l1^2\n"
               << "t,msd,std_error\n";
            for (std::size_t k = 0; k < msd.times.size(); ++k)
                os << msd.times[k] << "," << msd.msd[k] << "," << msd.std_errors[k] << "\n";
        }
        fits.push_back(diffusion_constant(res, c.diffusion.t_min));
        log << "kappa " << kappa << ": D = " << fits.back().D << " +- " << fits.back().std_error
            << ", R^2 = " << fits.back().r_squared << ", excluded " << res.excluded_fraction() << "\n";
        if (res.survivors() < 100)
            detail::warn(r, log, "fewer than 100 surviving trajectories at kappa " + std::to_string(kappa));
        if (!fits.back().linear())
            detail::warn(r, log, "MSD not linear (R^2 < 0.99) at kappa " + std::to_string(kappa));
    }
    // log-log least squares over all kappas
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const double x = std::log(c.diffusion.kappas[i]), y = std::log(std::max(fits[i].D, 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    {
        auto os = out.open("diffusion.csv");
        os << std::setprecision(12) << "# log-log slope " << slope << ", Goldstone prediction D kappa^2 = " << coeff
           << "\nkappa,D,std_error,r_squared,intercept,predicted\n";
        for (std::size_t i = 0; i < fits.size(); ++i) {
            const double k = c.diffusion.kappas[i];
            os << k << "," << fits[i].D << "," << fits[i].std_error << "," << fits[i].r_squared << ","
               << fits[i].intercept << "," << coeff / (k * k) << "\n";
        }
    }
    {
        auto os = out.open("plot_diffusion.py");
        os << "import numpy as np\nimport matplotlib.pyplot as plt\n\n"
           << "d = np.loadtxt('diffusion.csv', delimiter=',', skiprows=2, ndmin=2)\n"
           << "fig, ax = plt.subplots()\n"
           << "ax.errorbar(d[:, 0], d[:, 1], yerr=d[:, 2], fmt='o', label='fit')\n"
           << "ax.plot(d[:, 0], d[:, 5], '-', label='Goldstone prediction')\n"
           << "ax.set_xscale('log')\nax.set_yscale('log')\n"
           << "ax.set_xlabel(r'$\\kappa$')\nax.set_ylabel(r'$D$')\nax.legend()\n"
           << "fig.savefig('diffusion.png', dpi=150)\n";
    }
    log << "log-log slope " << slope << " (Goldstone prediction D kappa^2 = " << coeff << ")\n";
    return r;
}

/// Run one subcommand and leave a manifest next to its outputs, also on failure.
inline CommandResult run_command(const std::string& name, const RunConfig& c, std::ostream& log) {
    c.validate();
    std::filesystem::create_directories(c.output);
    RunManifest m;
    m.command = name;
    m.config_hash = config_hash(c);
    m.seed = c.seed;
    m.config = to_json(c);
    m.started = utc_timestamp();
    auto finish = [&](const CommandResult& r) {
        m.finished = utc_timestamp();
        m.outputs = r.outputs;
        m.exit_code = r.exit_code;
        m.write(c.output);
    };
    CommandResult r;
    try {
        if (name == "solve-ds")
            r = cmd_solve_ds(c, log);
        else if (name == "spectrum")
            r = cmd_spectrum(c, log);
        else if (name == "squeeze")
            r = cmd_squeeze(c, log);
        else if (name == "figure1")
            r = cmd_figure1(c, log);
        else if (name == "diffusion")
            r = cmd_diffusion(c, log);
        else
            throw ConfigError("unknown command " + name);
    } catch (const Error& e) {
        r.exit_code = static_cast<int>(e.code());
        finish(r);
        throw;
    }
    finish(r);
    return r;
}

} // namespace dopo
