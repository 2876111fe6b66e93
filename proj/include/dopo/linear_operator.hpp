#pragma once

// Linearised fluctuation operators around a stationary structure,
//
//   L  = [[-1 + iM, a0], [conj(a0), -1 - iM]],
//   L+ = [[-1 - iM, a0], [conj(a0), -1 + iM]],
//
// with M = d^2 - Delta1 + 2 sigma F^2 and a0 = mu + i sigma e^{2 i sigma theta} F^2.
// Dense matrices are expressed in the orthonormal Fourier-mode basis of V_N, so
// their size is 2(N-1) and the Euclidean inner product equals the field one.

#include <cmath>
#include <complex>
#include <memory>

#include <Eigen/Dense>

#include "dopo/grid.hpp"
#include "dopo/spectral.hpp"
#include "dopo/stationary.hpp"

namespace dopo {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class LinearOperator {
public:
    explicit LinearOperator(DsSolution ds) : background_(std::move(ds)), ops_(background_.grid()) {
        const auto& p = background_.params;
        const std::size_t n = ops_.size();
        const cplx e2 = std::polar(1.0, 2.0 * p.sigma * background_.theta);
        alpha0_.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double F2 = background_.profile.values[j] * background_.profile.values[j];
            alpha0_[j] = p.mu + cplx(0.0, p.sigma) * e2 * F2;
        }
        // Multipliers on the dealiasing grid: 2 sigma F^2 and a0 are exact there.
        const CVec Ff = ops_.values_to_fine(SpectralOps::to_complex(background_.profile.values));
        fine_potential_.resize(Ff.size());
        fine_alpha_.resize(Ff.size());
        fine_alpha_conj_.resize(Ff.size());
        for (std::size_t j = 0; j < Ff.size(); ++j) {
            const cplx F2 = Ff[j] * Ff[j];
            fine_potential_[j] = 2.0 * p.sigma * F2;
            fine_alpha_[j] = p.mu + cplx(0.0, p.sigma) * e2 * F2;
            fine_alpha_conj_[j] = p.mu + std::conj(cplx(0.0, p.sigma) * e2) * std::conj(F2);
        }
    }

    const DsSolution& background() const { return background_; }
    const GridPtr& grid() const { return background_.grid(); }
    const SpectralOps& ops() const { return ops_; }
    /// Pump-mediated coupling a0 on the grid.
    const CVec& alpha0_bar() const { return alpha0_; }

    FluctuationField apply(const FluctuationField& a) const { return apply_impl(a, +1.0); }
    FluctuationField apply_adjoint(const FluctuationField& a) const { return apply_impl(a, -1.0); }

    std::size_t dimension() const { return 2 * ops_.mode_count(); }

    /// Dense matrix of L (or L+) in mode coordinates, assembled column by column.
    CMatrix matrix(bool adjoint = false) const {
        const std::size_t m = ops_.mode_count();
        const std::size_t dim = 2 * m;
        CMatrix A(dim, dim);
        CVec unit(m, cplx{});
        const CVec zero(m, cplx{});
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t k = c % m;
            unit[k] = 1.0;
            const CVec v = ops_.from_modes(unit);
            FluctuationField e{grid(), c < m ? v : CVec(v.size()), c < m ? CVec(v.size()) : v};
            const FluctuationField r = adjoint ? apply_adjoint(e) : apply(e);
            A.col(static_cast<Eigen::Index>(c)) = to_coordinates(r);
            unit[k] = 0.0;
        }
        return A;
    }

    CVector to_coordinates(const FluctuationField& a) const {
        const std::size_t m = ops_.mode_count();
        const CVec c1 = ops_.to_modes(a.first);
        const CVec c2 = ops_.to_modes(a.second);
        CVector out(static_cast<Eigen::Index>(2 * m));
        for (std::size_t j = 0; j < m; ++j) {
            out(static_cast<Eigen::Index>(j)) = c1[j];
            out(static_cast<Eigen::Index>(m + j)) = c2[j];
        }
        return out;
    }

    FluctuationField from_coordinates(const CVector& c) const {
        const std::size_t m = ops_.mode_count();
        CVec c1(m), c2(m);
        for (std::size_t j = 0; j < m; ++j) {
            c1[j] = c(static_cast<Eigen::Index>(j));
            c2[j] = c(static_cast<Eigen::Index>(m + j));
        }
        return {grid(), ops_.from_modes(c1), ops_.from_modes(c2)};
    }

private:
    // sign = +1 for L, -1 for L+ (only the sign of iM differs).
    FluctuationField apply_impl(const FluctuationField& a, double sign) const {
        require_same_grid(a.grid, grid());
        const auto& p = background_.params;
        const CVec a1 = ops_.project(a.first);
        const CVec a2 = ops_.project(a.second);
        const CVec lap1 = ops_.laplacian(a1);
        const CVec lap2 = ops_.laplacian(a2);
        const CVec V1 = ops_.multiply(fine_potential_, a1);
        const CVec V2 = ops_.multiply(fine_potential_, a2);
        const CVec c12 = ops_.multiply(fine_alpha_, a2);
        const CVec c21 = ops_.multiply(fine_alpha_conj_, a1);
        const cplx is(0.0, sign);
        FluctuationField out = FluctuationField::zeros(grid());
        for (std::size_t j = 0; j < a1.size(); ++j) {
            const cplx M1 = lap1[j] - p.delta1 * a1[j] + V1[j];
            const cplx M2 = lap2[j] - p.delta1 * a2[j] + V2[j];
            out.first[j] = -a1[j] + is * M1 + c12[j];
            out.second[j] = c21[j] - a2[j] - is * M2;
        }
        return out;
    }

    DsSolution background_;
    SpectralOps ops_;
    CVec alpha0_;
    CVec fine_potential_;
    CVec fine_alpha_;
    CVec fine_alpha_conj_;
};

inline LinearOperator build_operator(const DsSolution& ds) { return LinearOperator(ds); }

/// Translation Goldstone mode G = (e^{i sigma theta} F', e^{-i sigma theta} F').
inline FluctuationField goldstone_field(const DsSolution& ds) {
    SpectralOps ops(ds.grid());
    const RVec dF = ops.derivative(ds.profile.values);
    const cplx ph = std::polar(1.0, ds.params.sigma * ds.theta);
    FluctuationField g = FluctuationField::zeros(ds.grid());
    for (std::size_t j = 0; j < dF.size(); ++j) {
        g.first[j] = ph * dF[j];
        g.second[j] = std::conj(ph) * dF[j];
    }
    return g;
}

/// Adjoint mode at eigenvalue -2: i G, i.e. (i e^{i sigma theta} F', -i e^{-i sigma theta} F').
inline FluctuationField w2_field(const DsSolution& ds) {
    FluctuationField g = goldstone_field(ds);
    for (std::size_t j = 0; j < g.first.size(); ++j) {
        g.first[j] *= cplx(0.0, 1.0);
        g.second[j] *= cplx(0.0, -1.0);
    }
    return g;
}

/// Element-wise a + s*b.
inline FluctuationField axpy(const FluctuationField& a, cplx s, const FluctuationField& b) {
    FluctuationField out = a;
    for (std::size_t j = 0; j < a.first.size(); ++j) {
        out.first[j] += s * b.first[j];
        out.second[j] += s * b.second[j];
    }
    return out;
}

} // namespace dopo
