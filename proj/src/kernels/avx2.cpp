#include <immintrin.h>

#include <cmath>

#include "kernels/tables.hpp"

namespace sopm::kernels::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

double squared_l2(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d a0 = _mm256_cvtps_pd(_mm_loadu_ps(a + i));
        const __m256d b0 = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
        const __m256d a1 = _mm256_cvtps_pd(_mm_loadu_ps(a + i + 4));
        const __m256d b1 = _mm256_cvtps_pd(_mm_loadu_ps(b + i + 4));
        const __m256d d0 = _mm256_sub_pd(a0, b0);
        const __m256d d1 = _mm256_sub_pd(a1, b1);
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot_mixed(const double* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d b0 = _mm256_cvtps_pd(_mm_loadu_ps(b + i));
        const __m256d b1 = _mm256_cvtps_pd(_mm_loadu_ps(b + i + 4));
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), b0, acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), b1, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * static_cast<double>(b[i]);
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_mixed(double alpha, const float* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_cvtps_pd(_mm_loadu_ps(x + i));
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, vx, _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * static_cast<double>(x[i]);
}

double sum(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += x[i];
    return acc;
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
    }
    double total = hsum(acc);
    for (; i < n; ++i) total += std::fabs(a[i] - b[i]);
    return total;
}

void max_inplace(double* dst, const double* src, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // max_pd(src, dst) returns dst when either operand is NaN; inputs are finite.
        _mm256_storeu_pd(dst + i, _mm256_max_pd(_mm256_loadu_pd(src + i), _mm256_loadu_pd(dst + i)));
    }
    for (; i < n; ++i) {
        if (src[i] > dst[i]) dst[i] = src[i];
    }
}

ThresholdCounts threshold_counts(const double* s, const std::uint8_t* mask, std::size_t n,
                                 double threshold) {
    const __m256d vt = _mm256_set1_pd(threshold);
    ThresholdCounts out;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const int above = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(s + i), vt, _CMP_GT_OQ));
        if (above == 0) continue;
        out.predicted += static_cast<std::uint64_t>(__builtin_popcount(static_cast<unsigned>(above)));
        const int fg = (mask[i] != 0) | ((mask[i + 1] != 0) << 1) | ((mask[i + 2] != 0) << 2) |
                       ((mask[i + 3] != 0) << 3);
        out.hits += static_cast<std::uint64_t>(__builtin_popcount(static_cast<unsigned>(above & fg)));
    }
    for (; i < n; ++i) {
        if (s[i] > threshold) {
            ++out.predicted;
            if (mask[i] != 0) ++out.hits;
        }
    }
    return out;
}

}  // namespace

const KernelTable kAvx2Table{
    Backend::Avx2, squared_l2, dot,         dot_mixed,   axpy,
    axpy_mixed,    sum,        abs_diff_sum, max_inplace, threshold_counts,
};

}  // namespace sopm::kernels::detail
