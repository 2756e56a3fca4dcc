#include "nilmtree/kernels.hpp"

#if defined(NILMTREE_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace nilmtree::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double l1_distance_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d signbit = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(signbit, d));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);  // tail
    return s;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double pair_residual_sq_avx2(const double* y, const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_sub_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(a + i)),
                                  _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) {
        double d = y[i] - a[i] - b[i];
        s += d * d;
    }
    return s;
}

void accumulate_avx2(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

const Ops kAvx2{"avx2", l1_distance_avx2, squared_distance_avx2, pair_residual_sq_avx2,
                accumulate_avx2};

}  // namespace

const Ops& avx2_ops() { return kAvx2; }

bool avx2_supported() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace nilmtree::kernels

#endif  // NILMTREE_HAVE_AVX2
