// Command-line front-end: dopo <command> [--config file] [overrides].

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dopo/commands.hpp"

namespace {

const char* csv_help = R"(Output files (all quantities in units gamma1 = 1, l1 = 1):
  solve-ds   ds.csv                 header "# sigma= mu= delta1= theta= beta_sq= kappa= length= kind=", columns x,F
  spectrum   spectrum.csv           index,re,im,tag (tag goldstone | w2 | empty)
             universal_modes.txt    residuals |L G|/|G| and |L+(iG)+2iG|/|iG|
  squeeze    squeeze_modal_<i>.csv  omega,S
             squeeze_mc_<i>.csv     omega,S,std_error
             correlation_<i>.csv    tau,C,std_error
             agreement.csv          lof,omega,modal,monte_carlo,std_error,z
  figure1    figure1_a.csv          xi_over_dx,S_omega_<w>...
             figure1_b.csv          xbar_over_dx,w2_omega_<w>...,gh1_omega_<w>...
  diffusion  msd_<i>.csv            t,msd,std_error
             diffusion.csv          kappa,D,std_error,r_squared,intercept,predicted
Every run writes manifest.json and a matplotlib script plot_*.py where applicable.
Exit codes: 0 ok, 1 internal, 2 config, 3 solver, 4 instability, 5 statistics.)";

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum fluctuations of dissipative structures in a degenerate optical parametric oscillator"};
    app.footer(csv_help);
    app.require_subcommand(1);
    app.fallthrough();  // options are accepted before or after the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    std::optional<double> mu, delta1, kappa, length;
    std::optional<std::size_t> n_points;
    std::optional<int> trajectories;
    std::optional<std::string> method;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    app.add_option("--mu", mu, "pump parameter mu");
    app.add_option("--delta1", delta1, "signal detuning Delta1");
    app.add_option("--kappa", kappa, "noise scale kappa");
    app.add_option("--n-points", n_points, "grid points");
    app.add_option("--length", length, "domain length");
    app.add_option("--trajectories", trajectories, "Monte-Carlo trajectories");
    app.add_option("--method", method, "squeeze method: modal, monte_carlo or both");

    for (const char* name : {"solve-ds", "spectrum", "squeeze", "figure1", "diffusion"})
        app.add_subcommand(name);
    app.get_subcommand("solve-ds")->description("solve for the stationary structure");
    app.get_subcommand("spectrum")->description("eigenvalues of the linear operator and the universal-mode check");
    app.get_subcommand("squeeze")->description("squeezing spectra, modal and/or Monte Carlo");
    app.get_subcommand("figure1")->description("LOF width and offset scans at sigma=+1, Delta1=1, mu=1.2");
    app.get_subcommand("diffusion")->description("position diffusion of the soliton across kappa");

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        dopo::RunConfig cfg = config_path.empty() ? dopo::RunConfig{} : dopo::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (out) cfg.output = *out;
        if (threads) cfg.threads = *threads;
        if (mu) cfg.model.mu = *mu;
        if (delta1) cfg.model.delta1 = *delta1;
        if (kappa) cfg.model.kappa = *kappa;
        if (n_points) cfg.n_points = *n_points;
        if (length) cfg.length = *length;
        if (trajectories) cfg.simulation.n_trajectories = *trajectories;
        if (method) cfg.squeeze.method = *method;
        const dopo::CommandResult r = dopo::run_command(command, cfg, std::cout);
        std::cout << "wrote " << r.outputs.size() << " files to " << cfg.output << "\n";
        return r.exit_code;
    } catch (const dopo::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return static_cast<int>(dopo::ExitCode::internal);
    }
}
