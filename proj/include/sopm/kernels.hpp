#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference and, on x86-64,
// an AVX2/FMA variant; the active table is chosen once at startup from CPUID
// and can be pinned with SOPM_KERNELS=scalar|avx2 or set_backend().

#include <cstddef>
#include <cstdint>
#include <optional>
#include <functional>
#include <span>
#include <string_view>

namespace sopm::kernels {

enum class Backend { Scalar, Avx2 };

struct ThresholdCounts {
    std::uint64_t predicted = 0;  // pixels with s > threshold
    std::uint64_t hits = 0;       // ... that are also foreground in the mask
};

struct KernelTable {
    Backend backend;
    // sum_i (a_i - b_i)^2, accumulated in double.
    double (*squared_l2)(const float* a, const float* b, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // dot of a double vector with a float vector.
    double (*dot_mixed)(const double* a, const float* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*axpy_mixed)(double alpha, const float* x, double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*abs_diff_sum)(const double* a, const double* b, std::size_t n);
    // dst_i = max(dst_i, src_i)
    void (*max_inplace)(double* dst, const double* src, std::size_t n);
    ThresholdCounts (*threshold_counts)(const double* s, const std::uint8_t* mask, std::size_t n,
                                        double threshold);
};

const KernelTable& scalar_table();
/// nullopt when the binary was built without AVX2 or the CPU lacks AVX2+FMA.
std::optional<std::reference_wrapper<const KernelTable>> avx2_table();

const KernelTable& active();
Backend active_backend();
/// Returns false (and leaves the selection unchanged) if `backend` is unavailable.
bool set_backend(Backend backend);
std::string_view backend_name(Backend backend);

inline double squared_l2(std::span<const float> a, std::span<const float> b) {
    return active().squared_l2(a.data(), b.data(), a.size());
}
inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double dot(std::span<const double> a, std::span<const float> b) {
    return active().dot_mixed(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}
inline void axpy(double alpha, std::span<const float> x, std::span<double> y) {
    active().axpy_mixed(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
    return active().abs_diff_sum(a.data(), b.data(), a.size());
}
inline void max_inplace(std::span<double> dst, std::span<const double> src) {
    active().max_inplace(dst.data(), src.data(), dst.size());
}
inline ThresholdCounts threshold_counts(std::span<const double> s, std::span<const std::uint8_t> mask,
                                        double threshold) {
    return active().threshold_counts(s.data(), mask.data(), s.size(), threshold);
}

}  // namespace sopm::kernels
