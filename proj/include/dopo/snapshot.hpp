#pragma once

// Binary restart snapshot of one positive-P trajectory.
//
// Layout (little-endian host order, no padding):
//   char[8]  magic "DOPOSNAP"
//   u32      format version
//   u64      n_points
//   f64      length, dt
//   u64      seed
//   u32      trajectory
//   u64      step
//   f64      t, kappa, position
//   u8       diverged
//   u64      branch_flips
//   c128[n]  spectrum of f
//   c128[n]  spectrum of f+

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "dopo/error.hpp"
#include "dopo/positive_p.hpp"

namespace dopo {

struct SnapshotHeader {
    std::uint32_t version = 1;
    std::uint64_t n_points = 0;
    double length = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint32_t trajectory = 0;
    std::uint64_t step = 0;
    double t = 0.0;
    double kappa = 0.0;
    double position = 0.0;
    bool diverged = false;
    std::uint64_t branch_flips = 0;
};

namespace detail {

inline constexpr std::array<char, 8> snapshot_magic{'D', 'O', 'P', 'O', 'S', 'N', 'A', 'P'};

template <class T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw ConfigError("snapshot truncated");
    return v;
}

} // namespace detail

inline void write_snapshot(const std::string& path, const TrajectoryState& s, const SimConfig& cfg) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw ConfigError("cannot write snapshot " + path);
    os.write(detail::snapshot_magic.data(), 8);
    detail::put<std::uint32_t>(os, 1);
    detail::put<std::uint64_t>(os, s.grid->n_points());
    detail::put(os, s.grid->length());
    detail::put(os, cfg.dt);
    detail::put(os, cfg.seed);
    detail::put(os, s.trajectory);
    detail::put(os, s.step);
    detail::put(os, s.t);
    detail::put(os, cfg.params.kappa);
    detail::put(os, s.position);
    detail::put<std::uint8_t>(os, s.diverged ? 1 : 0);
    detail::put(os, s.branch_flips);
    os.write(reinterpret_cast<const char*>(s.s1.data()), static_cast<std::streamsize>(s.s1.size() * sizeof(cplx)));
    os.write(reinterpret_cast<const char*>(s.s2.data()), static_cast<std::streamsize>(s.s2.size() * sizeof(cplx)));
    if (!os)
        throw ConfigError("failed writing snapshot " + path);
}

inline SnapshotHeader read_snapshot_header(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), 8);
    if (!is || magic != detail::snapshot_magic)
        throw ConfigError("not a snapshot file");
    SnapshotHeader h;
    h.version = detail::get<std::uint32_t>(is);
    if (h.version != 1)
        throw ConfigError("unsupported snapshot version " + std::to_string(h.version));
    h.n_points = detail::get<std::uint64_t>(is);
    h.length = detail::get<double>(is);
    h.dt = detail::get<double>(is);
    h.seed = detail::get<std::uint64_t>(is);
    h.trajectory = detail::get<std::uint32_t>(is);
    h.step = detail::get<std::uint64_t>(is);
    h.t = detail::get<double>(is);
    h.kappa = detail::get<double>(is);
    h.position = detail::get<double>(is);
    h.diverged = detail::get<std::uint8_t>(is) != 0;
    h.branch_flips = detail::get<std::uint64_t>(is);
    return h;
}

/// Restore a trajectory. The simulation config must match the snapshot's grid,
/// time step, seed and kappa, otherwise continuing would silently change the run.
inline TrajectoryState read_snapshot(const std::string& path, const SimConfig& cfg) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot open snapshot " + path);
    const SnapshotHeader h = read_snapshot_header(is);
    if (h.n_points != cfg.grid->n_points() || h.length != cfg.grid->length())
        throw GridMismatchError("snapshot grid differs from the simulation grid");
    if (h.dt != cfg.dt || h.seed != cfg.seed || h.kappa != cfg.params.kappa)
        throw ConfigError("snapshot dt, seed or kappa differ from the simulation config");
    TrajectoryState s;
    s.grid = cfg.grid;
    s.trajectory = h.trajectory;
    s.step = h.step;
    s.t = h.t;
    s.position = h.position;
    s.diverged = h.diverged;
    s.branch_flips = h.branch_flips;
    s.s1.resize(h.n_points);
    s.s2.resize(h.n_points);
    is.read(reinterpret_cast<char*>(s.s1.data()), static_cast<std::streamsize>(h.n_points * sizeof(cplx)));
    is.read(reinterpret_cast<char*>(s.s2.data()), static_cast<std::streamsize>(h.n_points * sizeof(cplx)));
    if (!is)
        throw ConfigError("snapshot truncated");
    return s;
}

} // namespace dopo
