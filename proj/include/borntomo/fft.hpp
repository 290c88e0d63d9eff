#pragma once

// Thin RAII layer over FFTW for batched in-place row transforms.
// Plans are created once under a global mutex (the FFTW planner is not
// thread-safe) with FFTW_ESTIMATE, which keeps plan choice and therefore
// results reproducible run to run. Execution uses the new-array interface,
// so one plan serves any number of threads, each with its own buffer.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <new>

#include <fftw3.h>

namespace borntomo::fft {

using cplx = std::complex<double>;

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

/// SIMD-aligned complex buffer.
class Buffer {
public:
    Buffer() = default;
    explicit Buffer(std::size_t n) : size_(n) {
        data_.reset(static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n)));
        if (!data_) throw std::bad_alloc();
        std::fill_n(data_.get(), n, cplx{});
    }
    cplx* data() { return data_.get(); }
    const cplx* data() const { return data_.get(); }
    std::size_t size() const { return size_; }
    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

private:
    std::unique_ptr<cplx[], FftwFree> data_;
    std::size_t size_ = 0;
};

/// 1D transforms of the first `count` contiguous rows of a buffer whose
/// rows have `length` entries.
class RowPlan {
public:
    RowPlan(std::size_t length, std::size_t count) : length_(length), count_(count) {
        Buffer probe(length * count);
        auto* p = reinterpret_cast<fftw_complex*>(probe.data());
        const int n[1] = {static_cast<int>(length)};
        const int len = static_cast<int>(length), howmany = static_cast<int>(count);
        std::lock_guard lock(planner_mutex());
        fwd_ = fftw_plan_many_dft(1, n, howmany, p, nullptr, 1, len, p, nullptr, 1, len, FFTW_FORWARD,
                                  FFTW_ESTIMATE);
        bwd_ = fftw_plan_many_dft(1, n, howmany, p, nullptr, 1, len, p, nullptr, 1, len, FFTW_BACKWARD,
                                  FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::bad_alloc();
    }
    ~RowPlan() {
        std::lock_guard lock(planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }
    RowPlan(const RowPlan&) = delete;
    RowPlan& operator=(const RowPlan&) = delete;

    std::size_t length() const { return length_; }
    std::size_t count() const { return count_; }

    void forward(cplx* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(fwd_, p, p);
    }
    /// Unnormalized inverse.
    void backward(cplx* data) const {
        auto* p = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(bwd_, p, p);
    }

private:
    std::size_t length_, count_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// dst[c * ld_dst + r] = src[r * ld_src + c] for r < rows, c < cols.
inline void transpose(const cplx* src, std::size_t rows, std::size_t cols, std::size_t ld_src, cplx* dst,
                      std::size_t ld_dst) {
    constexpr std::size_t B = 16;
    for (std::size_t r0 = 0; r0 < rows; r0 += B)
        for (std::size_t c0 = 0; c0 < cols; c0 += B) {
            const std::size_t r1 = std::min(rows, r0 + B), c1 = std::min(cols, c0 + B);
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) dst[c * ld_dst + r] = src[r * ld_src + c];
        }
}

} // namespace borntomo::fft
