#pragma once

// Fourier-Galerkin machinery on a Grid1D.
//
// Fields live in V_N, the span of e^{ikx} with |k| < k_Nyquist (the Nyquist mode
// is always zero). Products are formed on a 2N "fine" grid, which is exact for
// the cubic nonlinearities used here, and projected back onto V_N.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "dopo/fft.hpp"
#include "dopo/grid.hpp"

namespace dopo {

class SpectralOps {
public:
    explicit SpectralOps(GridPtr grid)
        : grid_(std::move(grid)), n_(grid_->n_points()), m_(2 * n_),
          coarse_(&fft::plan(n_)), fine_(&fft::plan(m_)) {}

    const GridPtr& grid_ptr() const { return grid_; }
    const Grid1D& grid() const { return *grid_; }
    std::size_t size() const { return n_; }
    std::size_t fine_size() const { return m_; }
    double fine_spacing() const { return grid_->length() / static_cast<double>(m_); }

    // --- grid values <-> unnormalised spectrum ---------------------------------
    CVec spectrum(std::span<const cplx> values) const {
        CVec out(n_);
        coarse_->forward(values.data(), out.data());
        return out;
    }
    CVec values(std::span<const cplx> spec) const {
        CVec out(n_);
        coarse_->backward(spec.data(), out.data());
        const double s = 1.0 / static_cast<double>(n_);
        for (auto& v : out)
            v *= s;
        return out;
    }

    /// Orthogonal projection onto V_N (removes the Nyquist component).
    CVec project(std::span<const cplx> v) const {
        CVec s = spectrum(v);
        s[n_ / 2] = 0.0;
        return values(s);
    }
    RVec project(std::span<const double> v) const { return real_part(project(to_complex(v))); }

    /// Spectral second derivative (periodic), Nyquist mode included.
    CVec laplacian(std::span<const cplx> v) const {
        CVec s = spectrum(v);
        const auto& k = grid_->wavenumbers();
        for (std::size_t j = 0; j < n_; ++j)
            s[j] *= -k[j] * k[j];
        return values(s);
    }
    RVec laplacian(std::span<const double> v) const { return real_part(laplacian(to_complex(v))); }

    /// Spectral first derivative; the Nyquist mode is mapped to zero.
    CVec derivative(std::span<const cplx> v) const {
        CVec s = spectrum(v);
        const auto& k = grid_->wavenumbers();
        for (std::size_t j = 0; j < n_; ++j)
            s[j] *= cplx(0.0, k[j]);
        s[n_ / 2] = 0.0;
        return values(s);
    }
    RVec derivative(std::span<const double> v) const { return real_part(derivative(to_complex(v))); }

    /// Band-limited translation: returns f(x - shift). Result lies in V_N.
    CVec shift(std::span<const cplx> v, double shift) const {
        CVec s = spectrum(v);
        const auto& k = grid_->wavenumbers();
        for (std::size_t j = 0; j < n_; ++j)
            s[j] *= std::exp(cplx(0.0, -k[j] * shift));
        s[n_ / 2] = 0.0;
        return values(s);
    }
    RVec shift(std::span<const double> v, double s) const { return real_part(shift(to_complex(v), s)); }

    // --- fine (dealiasing) grid --------------------------------------------------
    /// Trigonometric interpolant of a coarse spectrum evaluated on the 2N grid.
    void to_fine(std::span<const cplx> spec, std::span<cplx> fine_values, CVec& scratch) const {
        scratch.assign(m_, cplx{});
        const std::size_t h = n_ / 2;
        for (std::size_t j = 0; j < h; ++j)
            scratch[j] = spec[j];
        for (std::size_t j = h + 1; j < n_; ++j)
            scratch[m_ - (n_ - j)] = spec[j];
        scratch[h] = 0.5 * spec[h];
        scratch[m_ - h] = 0.5 * spec[h];
        fine_->backward(scratch.data(), fine_values.data());
        const double s = 1.0 / static_cast<double>(n_);
        for (auto& v : fine_values)
            v *= s;
    }
    CVec to_fine(std::span<const cplx> spec) const {
        CVec out(m_), scratch;
        to_fine(spec, out, scratch);
        return out;
    }
    CVec values_to_fine(std::span<const cplx> v) const { return to_fine(spectrum(v)); }

    /// Coarse spectrum (Nyquist removed) of a function sampled on the 2N grid.
    void from_fine(std::span<const cplx> fine_values, std::span<cplx> spec, CVec& scratch) const {
        scratch.resize(m_);
        fine_->forward(fine_values.data(), scratch.data());
        const double s = static_cast<double>(n_) / static_cast<double>(m_);
        const std::size_t h = n_ / 2;
        for (std::size_t j = 0; j < h; ++j)
            spec[j] = s * scratch[j];
        for (std::size_t j = h + 1; j < n_; ++j)
            spec[j] = s * scratch[m_ - (n_ - j)];
        spec[h] = 0.0;
    }
    CVec from_fine(std::span<const cplx> fine_values) const {
        CVec out(n_), scratch;
        from_fine(fine_values, out, scratch);
        return out;
    }

    /// P[g a] for a coarse field a and a multiplier g given on the fine grid.
    CVec multiply(std::span<const cplx> fine_multiplier, std::span<const cplx> a) const {
        CVec fa = values_to_fine(a);
        for (std::size_t j = 0; j < m_; ++j)
            fa[j] *= fine_multiplier[j];
        return values(from_fine(fa));
    }

    /// Dealiased P[u v w] of three coarse fields.
    CVec triple_product(std::span<const cplx> u, std::span<const cplx> v, std::span<const cplx> w) const {
        CVec fu = values_to_fine(u);
        const CVec fv = values_to_fine(v);
        const CVec fw = values_to_fine(w);
        for (std::size_t j = 0; j < m_; ++j)
            fu[j] *= fv[j] * fw[j];
        return values(from_fine(fu));
    }

    // --- orthonormal Fourier-mode coordinates -------------------------------------
    // Basis e_k(x) = exp(ikx)/sqrt(L) over the n-1 retained wavenumbers. Coordinates
    // in this basis carry the same inner product as the grid quadrature.
    std::size_t mode_count() const { return n_ - 1; }
    std::size_t mode_to_fft_index(std::size_t m) const { return m < n_ / 2 ? m : m + 1; }

    CVec to_modes(std::span<const cplx> v) const {
        const CVec s = spectrum(v);
        const double c = grid_->spacing() / std::sqrt(grid_->length());
        CVec out(n_ - 1);
        for (std::size_t m = 0; m + 1 < n_; ++m)
            out[m] = c * s[mode_to_fft_index(m)];
        return out;
    }
    CVec from_modes(std::span<const cplx> modes) const {
        const double c = std::sqrt(grid_->length()) / grid_->spacing();
        CVec s(n_, cplx{});
        for (std::size_t m = 0; m + 1 < n_; ++m)
            s[mode_to_fft_index(m)] = c * modes[m];
        return values(s);
    }

    static CVec to_complex(std::span<const double> v) { return CVec(v.begin(), v.end()); }
    static RVec real_part(std::span<const cplx> v) {
        RVec r(v.size());
        for (std::size_t j = 0; j < v.size(); ++j)
            r[j] = v[j].real();
        return r;
    }

private:
    GridPtr grid_;
    std::size_t n_;
    std::size_t m_;
    const fft::Plan* coarse_;
    const fft::Plan* fine_;
};

inline ComplexField laplacian(const ComplexField& f) {
    SpectralOps ops(f.grid);
    return {f.grid, ops.laplacian(f.values)};
}

inline RealField laplacian(const RealField& f) {
    SpectralOps ops(f.grid);
    return {f.grid, ops.laplacian(f.values)};
}

} // namespace dopo
