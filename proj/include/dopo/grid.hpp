#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "dopo/error.hpp"
#include "dopo/fft.hpp"

namespace dopo {

/// Uniform periodic grid x_j = -L/2 + j*dx, j = 0..n-1.
class Grid1D {
public:
    Grid1D(std::size_t n_points, double length) : n_(n_points), length_(length) {
        if (!is_power_of_two(n_points) || n_points < 4)
            throw ConfigError("grid n_points must be a power of two >= 4");
        if (!(length > 0.0))
            throw ConfigError("grid length must be positive");
        spacing_ = length_ / static_cast<double>(n_);
        x_.resize(n_);
        k_.resize(n_);
        const double dk = 2.0 * std::numbers::pi / length_;
        for (std::size_t j = 0; j < n_; ++j) {
            x_[j] = -0.5 * length_ + static_cast<double>(j) * spacing_;
            const auto s = static_cast<long>(j);
            const auto half = static_cast<long>(n_ / 2);
            k_[j] = dk * static_cast<double>(s < half ? s : s - static_cast<long>(n_));
        }
    }

    static bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

    std::size_t n_points() const { return n_; }
    double length() const { return length_; }
    double spacing() const { return spacing_; }
    double x(std::size_t j) const { return x_[j]; }
    const RVec& positions() const { return x_; }
    /// Wavenumbers in FFT order; the Nyquist entry (index n/2) is -pi/dx.
    const RVec& wavenumbers() const { return k_; }
    std::size_t nyquist_index() const { return n_ / 2; }
    double max_wavenumber() const { return std::numbers::pi / spacing_; }

    /// Minimum-image coordinate of x relative to the domain centre.
    double wrap(double x) const { return x - length_ * std::round(x / length_); }

    bool operator==(const Grid1D& o) const { return n_ == o.n_ && length_ == o.length_; }

private:
    std::size_t n_;
    double length_;
    double spacing_;
    RVec x_;
    RVec k_;
};

using GridPtr = std::shared_ptr<const Grid1D>;

inline GridPtr make_grid(std::size_t n_points = 256, double length = 40.0) {
    return std::make_shared<const Grid1D>(n_points, length);
}

inline void require_same_grid(const GridPtr& a, const GridPtr& b) {
    if (!a || !b || !(*a == *b)) {
        std::ostringstream os;
        os << "grid mismatch";
        if (a && b)
            os << ": (" << a->n_points() << ", " << a->length() << ") vs (" << b->n_points() << ", "
               << b->length() << ")";
        throw GridMismatchError(os.str());
    }
}

struct RealField {
    GridPtr grid;
    RVec values;

    static RealField zeros(GridPtr g) {
        const auto n = g->n_points();
        return {std::move(g), RVec(n, 0.0)};
    }
};

struct ComplexField {
    GridPtr grid;
    CVec values;

    static ComplexField zeros(GridPtr g) {
        const auto n = g->n_points();
        return {std::move(g), CVec(n, cplx{})};
    }
    static ComplexField from_real(const RealField& r) {
        ComplexField c{r.grid, CVec(r.values.begin(), r.values.end())};
        return c;
    }
};

/// Two-component fluctuation a = (a1, a1+); components are stored separately.
struct FluctuationField {
    GridPtr grid;
    CVec first;
    CVec second;

    static FluctuationField zeros(GridPtr g) {
        const auto n = g->n_points();
        return {std::move(g), CVec(n, cplx{}), CVec(n, cplx{})};
    }
};

/// <b|c> = dx * sum_j (conj(b1) c1 + conj(b2) c2).
inline cplx inner_product(const FluctuationField& b, const FluctuationField& c) {
    require_same_grid(b.grid, c.grid);
    cplx acc{};
    for (std::size_t j = 0; j < b.first.size(); ++j)
        acc += std::conj(b.first[j]) * c.first[j] + std::conj(b.second[j]) * c.second[j];
    return acc * b.grid->spacing();
}

inline double norm(const FluctuationField& b) { return std::sqrt(std::real(inner_product(b, b))); }

/// Single-component L2 norm squared, dx * sum |f|^2.
inline double norm_squared(std::span<const cplx> f, double dx) {
    double s = 0.0;
    for (auto v : f)
        s += std::norm(v);
    return s * dx;
}

} // namespace dopo
