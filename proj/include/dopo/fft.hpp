#pragma once

// Thin RAII layer over FFTW. Plans are created once per size (FFTW_ESTIMATE, so
// results are bit-reproducible) and executed with the new-array interface,
// which is safe to call concurrently. Complex vectors use 64-byte aligned
// storage so the SIMD plan applies; other pointers fall back to an unaligned plan.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <span>
#include <vector>

#include <fftw3.h>

namespace dopo {

template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using cplx = std::complex<double>;
using CVec = std::vector<cplx, AlignedAllocator<cplx>>;
using RVec = std::vector<double>;

namespace fft {

class Plan {
public:
    explicit Plan(std::size_t n) : n_(n) {
        CVec in(n), out(n);
        const int ni = static_cast<int>(n);
        auto make = [&](int dir, unsigned flags) {
            return fftw_plan_dft_1d(ni, raw(in.data()), raw(out.data()), dir, flags);
        };
        forward_ = make(FFTW_FORWARD, FFTW_ESTIMATE);
        backward_ = make(FFTW_BACKWARD, FFTW_ESTIMATE);
        forward_any_ = make(FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        backward_any_ = make(FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~Plan() {
        for (fftw_plan p : {forward_, backward_, forward_any_, backward_any_})
            fftw_destroy_plan(p);
    }
    Plan(const Plan&) = delete;
    Plan& operator=(const Plan&) = delete;

    std::size_t size() const { return n_; }

    /// Unnormalised forward transform, out-of-place.
    void forward(const cplx* in, cplx* out) const {
        fftw_execute_dft(aligned(in, out) ? forward_ : forward_any_, raw(const_cast<cplx*>(in)), raw(out));
    }
    /// Unnormalised backward transform, out-of-place.
    void backward(const cplx* in, cplx* out) const {
        fftw_execute_dft(aligned(in, out) ? backward_ : backward_any_, raw(const_cast<cplx*>(in)), raw(out));
    }

private:
    static fftw_complex* raw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
    static bool aligned(const cplx* a, const cplx* b) {
        return reinterpret_cast<std::uintptr_t>(a) % 64 == 0 && reinterpret_cast<std::uintptr_t>(b) % 64 == 0;
    }

    std::size_t n_;
    fftw_plan forward_;
    fftw_plan backward_;
    fftw_plan forward_any_;
    fftw_plan backward_any_;
};

/// Cached plan for size n; the reference stays valid for the process lifetime.
inline const Plan& plan(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<Plan>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot)
        slot = std::make_unique<Plan>(n);
    return *slot;
}

inline CVec forward(std::span<const cplx> in) {
    CVec out(in.size());
    plan(in.size()).forward(in.data(), out.data());
    return out;
}

/// Inverse transform including the 1/n normalisation.
inline CVec inverse(std::span<const cplx> in) {
    CVec out(in.size());
    plan(in.size()).backward(in.data(), out.data());
    const double s = 1.0 / static_cast<double>(in.size());
    for (auto& v : out)
        v *= s;
    return out;
}

} // namespace fft
} // namespace dopo
