#include "nilmtree/kernels.hpp"

#if defined(NILMTREE_HAVE_NEON)

#include <arm_neon.h>

#include <cmath>

namespace nilmtree::kernels {

namespace {

double l1_distance_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double pair_residual_sq_neon(const double* y, const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t d =
            vsubq_f64(vsubq_f64(vld1q_f64(y + i), vld1q_f64(a + i)), vld1q_f64(b + i));
        acc = vfmaq_f64(acc, d, d);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i) {
        double d = y[i] - a[i] - b[i];
        s += d * d;
    }
    return s;
}

void accumulate_neon(double* acc, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vld1q_f64(x + i)));
    }
    for (; i < n; ++i) acc[i] += x[i];
}

const Ops kNeon{"neon", l1_distance_neon, squared_distance_neon, pair_residual_sq_neon,
                accumulate_neon};

}  // namespace

const Ops& neon_ops() { return kNeon; }

}  // namespace nilmtree::kernels

#endif  // NILMTREE_HAVE_NEON
