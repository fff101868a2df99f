#include <cmath>

#include "kernels/tables.hpp"

namespace sopm::kernels::detail {
namespace {

double squared_l2(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double dot_mixed(const double* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * static_cast<double>(b[i]);
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_mixed(double alpha, const float* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * static_cast<double>(x[i]);
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double abs_diff_sum(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

void max_inplace(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (src[i] > dst[i]) dst[i] = src[i];
    }
}

ThresholdCounts threshold_counts(const double* s, const std::uint8_t* mask, std::size_t n,
                                 double threshold) {
    ThresholdCounts out;
    for (std::size_t i = 0; i < n; ++i) {
        if (s[i] > threshold) {
            ++out.predicted;
            if (mask[i] != 0) ++out.hits;
        }
    }
    return out;
}

}  // namespace

const KernelTable kScalarTable{
    Backend::Scalar, squared_l2, dot,         dot_mixed,   axpy,
    axpy_mixed,      sum,        abs_diff_sum, max_inplace, threshold_counts,
};

}  // namespace sopm::kernels::detail
