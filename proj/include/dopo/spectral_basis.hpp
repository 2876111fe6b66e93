#pragma once

// Full spectra of L and L+ and the biorthonormal mode basis {v_i, w_i}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "dopo/error.hpp"
#include "dopo/linear_operator.hpp"

namespace dopo {

namespace lapack {

struct EigenResult {
    CVector values;
    CMatrix vectors;  // right eigenvectors, one per column
};

/// Dense complex non-Hermitian eigendecomposition (right vectors only).
inline EigenResult eig(CMatrix A) {
    const auto n = static_cast<lapack_int>(A.rows());
    EigenResult r;
    r.values.resize(n);
    r.vectors.resize(n, n);
    cplx dummy{};
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, A.data(), n, r.values.data(), &dummy, 1,
                                          r.vectors.data(), n);
    if (info != 0) {
        std::ostringstream os;
        os << "zgeev failed with info = " << info;
        throw SolverError(os.str());
    }
    return r;
}

} // namespace lapack

struct EigenOptions {
    double goldstone_tol = 1e-6;    // |lambda| window for the Goldstone search
    double w2_tol = 1e-6;           // |lambda + 2| window for the w2 search
    double pairing_tol = 1e-6;      // eigenvalue clustering between L and conj(spec L+)
    double defect_rcond = 1e-10;    // cluster Gram matrices below this are treated as defective
    double stability_tol = 1e-8;    // max Re(lambda) allowed outside the Goldstone mode
    bool require_stable = true;
};

class SpectralBasis {
public:
    std::vector<cplx> eigenvalues;
    CMatrix right;    // v_i in mode coordinates (columns)
    CMatrix adjoint;  // w_i in mode coordinates (columns)
    int goldstone_index = -1;
    int w2_index = -1;
    double w2_overlap = 0.0;        // |<w2|iG>| / (|w2| |iG|)
    double biorthogonality_error = 0.0;
    double pairing_error = 0.0;     // max |W^H V - I| before refinement
    double adjoint_mismatch = 0.0;  // max |L+ - L^H| of the assembled matrices
    double max_real_part = 0.0;     // excluding the Goldstone mode

    std::size_t size() const { return eigenvalues.size(); }
    FluctuationField right_mode(const LinearOperator& op, std::size_t i) const {
        return op.from_coordinates(right.col(static_cast<Eigen::Index>(i)));
    }
    FluctuationField adjoint_mode(const LinearOperator& op, std::size_t i) const {
        return op.from_coordinates(adjoint.col(static_cast<Eigen::Index>(i)));
    }
    const char* tag(std::size_t i) const {
        if (static_cast<int>(i) == goldstone_index) return "goldstone";
        if (static_cast<int>(i) == w2_index) return "w2";
        return "bulk";
    }
};

namespace detail {

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t i) {
        while (parent[i] != i)
            i = parent[i] = parent[parent[i]];
        return i;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

/// Scale each column to unit norm and make its largest grid value real positive.
inline void normalise_right(const LinearOperator& op, CMatrix& V) {
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
        V.col(i) /= V.col(i).norm();
        const FluctuationField f = op.from_coordinates(V.col(i));
        cplx best{};
        for (std::size_t j = 0; j < f.first.size(); ++j) {
            if (std::abs(f.first[j]) > std::abs(best)) best = f.first[j];
            if (std::abs(f.second[j]) > std::abs(best)) best = f.second[j];
        }
        if (std::abs(best) > 0.0)
            V.col(i) *= std::conj(best) / std::abs(best);
    }
}

} // namespace detail

/// Eigendecompose L and L+ separately, pair eigenvalues lambda <-> conj(mu), and
/// biorthonormalise within each cluster of (nearly) coincident eigenvalues.
inline SpectralBasis eigendecompose(const LinearOperator& op, EigenOptions opts = {}) {
    const CMatrix A = op.matrix(false);
    const CMatrix B = op.matrix(true);
    SpectralBasis basis;
    basis.adjoint_mismatch = (B - A.adjoint()).cwiseAbs().maxCoeff();

    lapack::EigenResult R = lapack::eig(A);
    lapack::EigenResult Lr = lapack::eig(B);
    const auto n = static_cast<std::size_t>(A.rows());

    // Order by decreasing real part, ties by imaginary part, for determinism.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto by_value = [](const CVector& v) {
        return [&v](std::size_t a, std::size_t b) {
            const cplx x = v(static_cast<Eigen::Index>(a)), y = v(static_cast<Eigen::Index>(b));
            if (x.real() != y.real()) return x.real() > y.real();
            return x.imag() < y.imag();
        };
    };
    std::sort(order.begin(), order.end(), by_value(R.values));
    std::vector<cplx> lam(n);
    CMatrix V(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        lam[i] = R.values(static_cast<Eigen::Index>(order[i]));
        V.col(static_cast<Eigen::Index>(i)) = R.vectors.col(static_cast<Eigen::Index>(order[i]));
    }
    std::vector<cplx> mu(n);
    for (std::size_t i = 0; i < n; ++i)
        mu[i] = std::conj(Lr.values(static_cast<Eigen::Index>(i)));

    // Clusters over the 2n values {lambda_i} u {conj(mu_j)}.
    detail::UnionFind uf(2 * n);
    {
        std::vector<std::pair<cplx, std::size_t>> all;
        all.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            all.emplace_back(lam[i], i);
            all.emplace_back(mu[i], n + i);
        }
        std::sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first.real() < b.first.real(); });
        for (std::size_t a = 0; a < all.size(); ++a)
            for (std::size_t b = a + 1; b < all.size() && all[b].first.real() - all[a].first.real() < opts.pairing_tol;
                 ++b)
                if (std::abs(all[a].first - all[b].first) < opts.pairing_tol)
                    uf.unite(all[a].second, all[b].second);
    }
    std::vector<std::vector<std::size_t>> right_of(2 * n), left_of(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        right_of[uf.find(i)].push_back(i);
        left_of[uf.find(n + i)].push_back(i);
    }

    detail::normalise_right(op, V);
    CMatrix W(n, n);
    for (std::size_t root = 0; root < 2 * n; ++root) {
        const auto& ri = right_of[root];
        const auto& li = left_of[root];
        if (ri.empty() && li.empty())
            continue;
        if (ri.size() != li.size()) {
            std::ostringstream os;
            os << "eigenvalue pairing failed: cluster near " << (ri.empty() ? mu[li[0]] : lam[ri[0]]) << " has "
               << ri.size() << " eigenvalues of L but " << li.size() << " of the adjoint";
            throw PairingError(os.str());
        }
        const auto k = static_cast<Eigen::Index>(ri.size());
        CMatrix Vc(n, k), Uc(n, k);
        for (Eigen::Index c = 0; c < k; ++c) {
            Vc.col(c) = V.col(static_cast<Eigen::Index>(ri[static_cast<std::size_t>(c)]));
            Uc.col(c) = Lr.vectors.col(static_cast<Eigen::Index>(li[static_cast<std::size_t>(c)]));
        }
        const CMatrix G = Uc.adjoint() * Vc;
        Eigen::JacobiSVD<CMatrix> svd(G);
        const auto& s = svd.singularValues();
        if (s(k - 1) < opts.defect_rcond * s(0)) {
            std::ostringstream os;
            os << "defective eigenvalue cluster near " << lam[ri[0]] << " (size " << k << ", rcond "
               << s(k - 1) / s(0) << ")";
            throw PairingError(os.str());
        }
        // W_c = U_c G^{-H}, so that W_c^H V_c = I.
        const CMatrix Wc = Uc * G.adjoint().inverse();
        for (Eigen::Index c = 0; c < k; ++c)
            W.col(static_cast<Eigen::Index>(ri[static_cast<std::size_t>(c)])) = Wc.col(c);
    }
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
        const cplx d = W.col(i).dot(V.col(i));  // <w|v>
        W.col(i) /= std::conj(d);
    }

    // One biorthogonal refinement sweep, W <- W E^{-H} with E = W^H V. This removes
    // the cross-cluster leakage left by independently computed adjoint vectors.
    const auto nn = static_cast<Eigen::Index>(n);
    const CMatrix I = CMatrix::Identity(nn, nn);
    basis.pairing_error = (W.adjoint() * V - I).cwiseAbs().maxCoeff();
    const CMatrix E = W.adjoint() * V;
    W = W * E.adjoint().partialPivLu().inverse();

    basis.eigenvalues = std::move(lam);
    basis.right = std::move(V);
    basis.adjoint = std::move(W);
    basis.biorthogonality_error = (basis.adjoint.adjoint() * basis.right - I).cwiseAbs().maxCoeff();

    // Universal modes, identified by overlap with the analytic fields.
    const DsSolution& ds = op.background();
    const FluctuationField G = goldstone_field(ds);
    const double gnorm = norm(G);
    if (gnorm > 1e-10) {
        const CVector g = op.to_coordinates(G);
        const CVector ig = op.to_coordinates(w2_field(ds));
        double best_g = -1.0, best_w = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (std::abs(basis.eigenvalues[i]) < opts.goldstone_tol) {
                const double ov = std::abs(basis.right.col(ii).dot(g)) / gnorm;
                if (ov > best_g) {
                    best_g = ov;
                    basis.goldstone_index = static_cast<int>(i);
                }
            }
            if (std::abs(basis.eigenvalues[i] + 2.0) < opts.w2_tol) {
                const double ov = std::abs(basis.adjoint.col(ii).dot(ig)) / (basis.adjoint.col(ii).norm() * gnorm);
                if (ov > best_w) {
                    best_w = ov;
                    basis.w2_index = static_cast<int>(i);
                }
            }
        }
        basis.w2_overlap = std::max(best_w, 0.0);
    }

    basis.max_real_part = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (static_cast<int>(i) != basis.goldstone_index)
            basis.max_real_part = std::max(basis.max_real_part, basis.eigenvalues[i].real());
    if (opts.require_stable && basis.max_real_part > opts.stability_tol) {
        std::ostringstream os;
        os << "unstable background (sigma=" << ds.params.sigma << ", mu=" << ds.params.mu
           << ", delta1=" << ds.params.delta1 << ", " << to_string(ds.kind)
           << "): max Re(lambda) = " << basis.max_real_part;
        throw InstabilityError(os.str());
    }
    return basis;
}

struct UniversalModeReport {
    bool applicable = false;         // false for backgrounds without a Goldstone pair
    double goldstone_residual = 0.0; // |L G| / |G|
    double w2_residual = 0.0;        // |L+(iG) + 2 iG| / |iG|
    double w2_overlap = 0.0;         // from the basis, if supplied
    std::optional<cplx> goldstone_eigenvalue;
    std::optional<cplx> w2_eigenvalue;
    double tolerance = 1e-6;

    bool goldstone_ok() const { return applicable && goldstone_residual < tolerance; }
    bool w2_ok() const { return applicable && w2_residual < tolerance; }
    bool passed() const { return goldstone_ok() && w2_ok(); }
};

inline UniversalModeReport verify_universal_modes(const LinearOperator& op, const SpectralBasis* basis = nullptr,
                                                  double tolerance = 1e-6) {
    UniversalModeReport rep;
    rep.tolerance = tolerance;
    const DsSolution& ds = op.background();
    const FluctuationField G = goldstone_field(ds);
    const double gn = norm(G);
    if (ds.trivial() || gn < 1e-10 * std::max(1.0, std::sqrt(ds.grid()->length())))
        return rep;
    rep.applicable = true;
    rep.goldstone_residual = norm(op.apply(G)) / gn;
    const FluctuationField w = w2_field(ds);
    rep.w2_residual = norm(axpy(op.apply_adjoint(w), 2.0, w)) / norm(w);
    if (basis) {
        rep.w2_overlap = basis->w2_overlap;
        if (basis->goldstone_index >= 0)
            rep.goldstone_eigenvalue = basis->eigenvalues[static_cast<std::size_t>(basis->goldstone_index)];
        if (basis->w2_index >= 0)
            rep.w2_eigenvalue = basis->eigenvalues[static_cast<std::size_t>(basis->w2_index)];
    }
    return rep;
}

inline void write_report(std::ostream& os, const UniversalModeReport& r) {
    if (!r.applicable) {
        os << "no Goldstone pair (homogeneous or trivial background): universal-mode check not applicable\n";
        return;
    }
    os << std::setprecision(6) << std::scientific;
    os << "goldstone residual |L G|/|G|            = " << r.goldstone_residual << (r.goldstone_ok() ? "  ok" : "  FAIL")
       << "\n";
    os << "w2 residual |L+(iG)+2iG|/|iG|           = " << r.w2_residual << (r.w2_ok() ? "  ok" : "  FAIL") << "\n";
    if (r.goldstone_eigenvalue)
        os << "goldstone eigenvalue                    = " << r.goldstone_eigenvalue->real() << " "
           << r.goldstone_eigenvalue->imag() << "i\n";
    if (r.w2_eigenvalue)
        os << "w2 eigenvalue                           = " << r.w2_eigenvalue->real() << " " << r.w2_eigenvalue->imag()
           << "i  (overlap with iG " << std::fixed << r.w2_overlap << ")\n";
    os << std::defaultfloat;
}

/// Spectrum dump: index, re, im, tag.
inline void write_spectrum_csv(std::ostream& os, const SpectralBasis& b) {
    os << std::setprecision(17) << "index,re,im,tag\n";
    for (std::size_t i = 0; i < b.size(); ++i)
        os << i << "," << b.eigenvalues[i].real() << "," << b.eigenvalues[i].imag() << "," << b.tag(i) << "\n";
}

/// Eigenvalues of the 2x2 Fourier block of L at wavenumber k over F = 0.
inline std::pair<cplx, cplx> trivial_block_eigenvalues(const ReducedParams& p, double k) {
    const cplx r = std::sqrt(cplx(p.mu * p.mu - std::pow(k * k + p.delta1, 2), 0.0));
    return {-1.0 + r, -1.0 - r};
}

/// The nine-point parameter sweep sigma = +1, Delta1 in {0.5, 1, 2}, mu in {1.05, 1.2, 2}.
inline std::vector<ReducedParams> universality_sweep() {
    std::vector<ReducedParams> out;
    for (double d : {0.5, 1.0, 2.0})
        for (double m : {1.05, 1.2, 2.0}) {
            ReducedParams p;
            p.sigma = +1;
            p.delta1 = d;
            p.mu = m;
            out.push_back(p);
        }
    return out;
}

} // namespace dopo
