#pragma once

// Run configuration (JSON, unknown keys rejected) and the per-run manifest.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dopo/error.hpp"
#include "dopo/model.hpp"
#include "dopo/squeezing.hpp"

namespace dopo {

inline constexpr const char* artifact_version = "1.0.0";

struct LofConfig {
    std::string kind = "w2";  // w2 | gh1
    double width_over_dx = 1.0;
    double offset_over_dx = 0.0;
    std::string mode = "tracked";  // tracked | static
    double delay = 0.0;
};

struct SolverConfig {
    std::string initial = "soliton";  // soliton | homogeneous | zero | file
    double guess_scale = 1.0;
    int max_iter = 50;
    double tolerance = 1e-10;
    std::string profile;  // CSV written by solve-ds, for initial = file
};

struct SimulationConfig {
    double dt = 0.025;
    double t_end = 40.0;
    double burn_in = 10.0;
    double sample_interval = 0.05;
    int n_trajectories = 1000;
    double lag_window = 5.0;
    double divergence_factor = 100.0;
};

struct SqueezeConfig {
    std::string method = "modal";  // modal | monte_carlo | both
    std::vector<LofConfig> lofs{LofConfig{}};
    std::vector<double> omegas;  // empty: command default
    std::optional<double> window;  // detection time t_H; none = infinite
};

struct Figure1Config {
    std::vector<double> label_omegas{0.0, 1.0, 2.0};
    double gh_width_over_dx = 1.0;
};

struct DiffusionConfig {
    std::vector<double> kappas{50.0, 100.0, 200.0};
    double t_min = 5.0;
    SimulationConfig simulation{0.025, 60.0, 1.0, 0.1, 250, 5.0, 100.0};
};

struct RunConfig {
    ReducedParams model{1, 1.2, 1.0, 1000.0, 1.0, 1.0};
    std::size_t n_points = 256;
    double length = 40.0;
    SolverConfig solver;
    bool require_stable = true;
    SqueezeConfig squeeze;
    SimulationConfig simulation;
    Figure1Config figure1;
    DiffusionConfig diffusion;
    std::uint64_t seed = 1;
    int threads = 0;  // 0: hardware concurrency
    std::string output = "out";

    /// Check every block against the preconditions of the modules it feeds.
    void validate() const {
        dopo::validate(model);
        if (n_points < 16 || !Grid1D::is_power_of_two(n_points))
            throw ConfigError("grid.n_points must be a power of two >= 16");
        if (!(length > 0.0))
            throw ConfigError("grid.length must be positive");
        static const std::set<std::string> initials{"soliton", "homogeneous", "zero", "file"};
        if (!initials.count(solver.initial))
            throw ConfigError("solver.initial must be one of soliton, homogeneous, zero, file");
        if (solver.initial == "file" && solver.profile.empty())
            throw ConfigError("solver.profile is required when solver.initial = file");
        if (!(solver.guess_scale > 0.0) || solver.max_iter < 1 || !(solver.tolerance > 0.0))
            throw ConfigError("solver.guess_scale, max_iter and tolerance must be positive");
        static const std::set<std::string> methods{"modal", "monte_carlo", "both"};
        if (!methods.count(squeeze.method))
            throw ConfigError("squeeze.method must be modal, monte_carlo or both");
        if (squeeze.lofs.empty())
            throw ConfigError("squeeze.lofs must not be empty");
        for (const auto& l : squeeze.lofs) {
            if (l.kind != "w2" && l.kind != "gh1")
                throw ConfigError("lof.kind must be w2 or gh1");
            if (l.kind == "gh1" && !(l.width_over_dx > 0.0))
                throw ConfigError("lof.width_over_dx must be positive");
            if (l.mode != "tracked" && l.mode != "static")
                throw ConfigError("lof.mode must be tracked or static");
            if (l.delay < 0.0)
                throw ConfigError("lof.delay must be non-negative");
        }
        for (double w : squeeze.omegas)
            if (!(w >= 0.0))
                throw ConfigError("squeeze.omegas must be non-negative");
        if (squeeze.window && !(*squeeze.window > 0.0))
            throw ConfigError("squeeze.window must be positive");
        check(simulation, "simulation");
        check(diffusion.simulation, "diffusion.simulation");
        if (diffusion.kappas.size() < 2)
            throw ConfigError("diffusion.kappas needs at least two values");
        for (double k : diffusion.kappas)
            if (!(k > 0.0))
                throw ConfigError("diffusion.kappas must be positive");
        if (!(diffusion.t_min >= 0.0) || diffusion.t_min >= diffusion.simulation.t_end)
            throw ConfigError("diffusion.t_min must lie in [0, t_end)");
        if (!(figure1.gh_width_over_dx > 0.0))
            throw ConfigError("figure1.gh_width_over_dx must be positive");
        if (threads < 0)
            throw ConfigError("threads must be non-negative");
        if (output.empty())
            throw ConfigError("output directory must not be empty");
    }

    GridPtr grid() const { return make_grid(n_points, length); }

    static void check(const SimulationConfig& s, const std::string& where) {
        if (!(s.dt > 0.0) || !(s.t_end > 0.0) || !(s.sample_interval > 0.0))
            throw ConfigError(where + ": dt, t_end and sample_interval must be positive");
        if (!(s.burn_in >= 0.0) || s.burn_in >= s.t_end)
            throw ConfigError(where + ": burn_in must lie in [0, t_end)");
        if (s.n_trajectories < 1)
            throw ConfigError(where + ": n_trajectories must be >= 1");
        if (!(s.lag_window > 0.0) || !(s.divergence_factor > 0.0))
            throw ConfigError(where + ": lag_window and divergence_factor must be positive");
    }
};

namespace detail {

using nlohmann::json;

/// Reads one JSON object, remembering which keys were consumed so that any
/// leftover (misspelt or unsupported) key can be reported.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object())
            throw ConfigError(where() + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(where(key) + " has the wrong type");
        }
    }

    void get_optional(const char* key, std::optional<double>& out) {
        seen_.insert(key);
        if (!j_.contains(key) || j_.at(key).is_null())
            return;
        double v = 0.0;
        get(key, v);
        out = v;
    }

    std::optional<ObjectReader> child(const char* key) {
        seen_.insert(key);
        if (!j_.contains(key))
            return std::nullopt;
        return ObjectReader(j_.at(key), where(key));
    }

    const json* raw(const char* key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("unknown configuration key " + where(it.key().c_str()));
    }

    std::string where(const char* key = nullptr) const {
        std::string s = path_.empty() ? "" : path_;
        if (key)
            s += (s.empty() ? "" : ".") + std::string(key);
        return s.empty() ? "<root>" : s;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void read_simulation(ObjectReader r, SimulationConfig& s) {
    r.get("dt", s.dt);
    r.get("t_end", s.t_end);
    r.get("burn_in", s.burn_in);
    r.get("sample_interval", s.sample_interval);
    r.get("n_trajectories", s.n_trajectories);
    r.get("lag_window", s.lag_window);
    r.get("divergence_factor", s.divergence_factor);
    r.finish();
}

inline json simulation_json(const SimulationConfig& s) {
    return {{"dt", s.dt},
            {"t_end", s.t_end},
            {"burn_in", s.burn_in},
            {"sample_interval", s.sample_interval},
            {"n_trajectories", s.n_trajectories},
            {"lag_window", s.lag_window},
            {"divergence_factor", s.divergence_factor}};
}

} // namespace detail

/// Parse a configuration document. Missing keys keep their defaults.
inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    RunConfig c;
    detail::ObjectReader root(j, "");
    if (auto m = root.child("model")) {
        m->get("sigma", c.model.sigma);
        m->get("mu", c.model.mu);
        m->get("delta1", c.model.delta1);
        m->get("kappa", c.model.kappa);
        m->finish();
    }
    if (auto cav = root.child("cavity")) {
        if (j.contains("model"))
            throw ConfigError("give either model or cavity, not both");
        ModelParams full;
        RegimeOptions ro;
        cav->get("gamma0", full.gamma0);
        cav->get("gamma1", full.gamma1);
        cav->get("delta0", full.delta0);
        cav->get("delta1", full.delta1);
        cav->get("g", full.g);
        cav->get("pump_amplitude", full.pump_amplitude);
        cav->get("l1", full.l1);
        cav->get("regime_threshold", ro.threshold);
        cav->finish();
        c.model = reduce_parameters(full, ro);
    }
    if (auto g = root.child("grid")) {
        g->get("n_points", c.n_points);
        g->get("length", c.length);
        g->finish();
    }
    if (auto s = root.child("solver")) {
        s->get("initial", c.solver.initial);
        s->get("guess_scale", c.solver.guess_scale);
        s->get("max_iter", c.solver.max_iter);
        s->get("tolerance", c.solver.tolerance);
        s->get("profile", c.solver.profile);
        s->finish();
    }
    if (auto s = root.child("spectrum")) {
        s->get("require_stable", c.require_stable);
        s->finish();
    }
    if (auto s = root.child("squeeze")) {
        s->get("method", c.squeeze.method);
        s->get("omegas", c.squeeze.omegas);
        s->get_optional("window", c.squeeze.window);
        if (const auto* lofs = s->raw("lofs")) {
            if (!lofs->is_array())
                throw ConfigError("squeeze.lofs must be an array");
            c.squeeze.lofs.clear();
            for (std::size_t i = 0; i < lofs->size(); ++i) {
                detail::ObjectReader r((*lofs)[i], "squeeze.lofs[" + std::to_string(i) + "]");
                LofConfig l;
                r.get("kind", l.kind);
                r.get("width_over_dx", l.width_over_dx);
                r.get("offset_over_dx", l.offset_over_dx);
                r.get("mode", l.mode);
                r.get("delay", l.delay);
                r.finish();
                c.squeeze.lofs.push_back(l);
            }
        }
        s->finish();
    }
    if (auto s = root.child("simulation"))
        detail::read_simulation(*s, c.simulation);
    if (auto s = root.child("figure1")) {
        s->get("label_omegas", c.figure1.label_omegas);
        s->get("gh_width_over_dx", c.figure1.gh_width_over_dx);
        s->finish();
    }
    if (auto s = root.child("diffusion")) {
        s->get("kappas", c.diffusion.kappas);
        s->get("t_min", c.diffusion.t_min);
        if (auto sim = s->child("simulation"))
            detail::read_simulation(*sim, c.diffusion.simulation);
        s->finish();
    }
    root.get("seed", c.seed);
    root.get("threads", c.threads);
    root.get("output", c.output);
    root.finish();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("cannot open configuration " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

/// Canonical JSON form: every field, defaults included, so that the hash
/// identifies the run independently of how the file was written.
inline nlohmann::json to_json(const RunConfig& c) {
    using detail::json;
    json lofs = json::array();
    for (const auto& l : c.squeeze.lofs)
        lofs.push_back({{"kind", l.kind},
                        {"width_over_dx", l.width_over_dx},
                        {"offset_over_dx", l.offset_over_dx},
                        {"mode", l.mode},
                        {"delay", l.delay}});
    return {
        {"model", {{"sigma", c.model.sigma}, {"mu", c.model.mu}, {"delta1", c.model.delta1}, {"kappa", c.model.kappa}}},
        {"grid", {{"n_points", c.n_points}, {"length", c.length}}},
        {"solver",
         {{"initial", c.solver.initial},
          {"guess_scale", c.solver.guess_scale},
          {"max_iter", c.solver.max_iter},
          {"tolerance", c.solver.tolerance},
          {"profile", c.solver.profile}}},
        {"spectrum", {{"require_stable", c.require_stable}}},
        {"squeeze",
         {{"method", c.squeeze.method},
          {"lofs", lofs},
          {"omegas", c.squeeze.omegas},
          {"window", c.squeeze.window ? json(*c.squeeze.window) : json(nullptr)}}},
        {"simulation", detail::simulation_json(c.simulation)},
        {"figure1", {{"label_omegas", c.figure1.label_omegas}, {"gh_width_over_dx", c.figure1.gh_width_over_dx}}},
        {"diffusion",
         {{"kappas", c.diffusion.kappas},
          {"t_min", c.diffusion.t_min},
          {"simulation", detail::simulation_json(c.diffusion.simulation)}}},
        {"seed", c.seed},
        {"threads", c.threads},
        {"output", c.output},
    };
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Hash of the parameters that determine the outputs (thread count and output
/// directory excluded: neither changes a result).
inline std::string config_hash(const RunConfig& c) {
    auto j = to_json(c);
    j.erase("threads");
    j.erase("output");
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(j.dump());
    return os.str();
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    std::vector<std::string> outputs;
    nlohmann::json config;
    int exit_code = 0;

    nlohmann::json to_json() const {
        return {{"artifact_version", artifact_version},
                {"command", command},
                {"config_hash", config_hash},
                {"seed", seed},
                {"started", started},
                {"finished", finished},
                {"exit_code", exit_code},
                {"outputs", outputs},
                {"config", config}};
    }

    void write(const std::filesystem::path& dir) const {
        std::ofstream os(dir / "manifest.json");
        if (!os)
            throw ConfigError("cannot write manifest in " + dir.string());
        os << to_json().dump(2) << "\n";
    }
};

} // namespace dopo
