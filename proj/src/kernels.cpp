#include "nilmtree/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "nilmtree/errors.hpp"

namespace nilmtree::kernels {

namespace {

double l1_distance_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
    return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double pair_residual_sq_scalar(const double* y, const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = y[i] - a[i] - b[i];
        s += d * d;
    }
    return s;
}

void accumulate_scalar(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

const Ops kScalar{"scalar", l1_distance_scalar, squared_distance_scalar,
                  pair_residual_sq_scalar, accumulate_scalar};

}  // namespace

const Ops& scalar_ops() { return kScalar; }

#if defined(NILMTREE_HAVE_AVX2)
const Ops& avx2_ops();  // kernels_avx2.cpp
bool avx2_supported();
#endif
#if defined(NILMTREE_HAVE_NEON)
const Ops& neon_ops();  // kernels_neon.cpp
#endif

namespace {

const Ops* pick_auto() {
#if defined(NILMTREE_HAVE_AVX2)
    if (avx2_supported()) return &avx2_ops();
#endif
#if defined(NILMTREE_HAVE_NEON)
    return &neon_ops();
#endif
    return &kScalar;
}

const Ops* resolve(const std::string& name) {
    if (name == "auto") return pick_auto();
    if (name == "scalar") return &kScalar;
#if defined(NILMTREE_HAVE_AVX2)
    if (name == "avx2") {
        if (!avx2_supported()) throw ConfigError("kernel backend avx2 not supported by this CPU");
        return &avx2_ops();
    }
#endif
#if defined(NILMTREE_HAVE_NEON)
    if (name == "neon") return &neon_ops();
#endif
    throw ConfigError("unknown kernel backend: " + name);
}

std::atomic<const Ops*> g_active{nullptr};
std::once_flag g_init;

void init_from_env() {
    const char* env = std::getenv("NILMTREE_KERNELS");
    g_active.store(resolve(env ? env : "auto"));
}

}  // namespace

const Ops& active() {
    std::call_once(g_init, init_from_env);
    return *g_active.load();
}

void force(const std::string& name) {
    std::call_once(g_init, init_from_env);
    g_active.store(resolve(name));
}

std::vector<std::string> available() {
    std::vector<std::string> out{"scalar"};
#if defined(NILMTREE_HAVE_AVX2)
    if (avx2_supported()) out.push_back("avx2");
#endif
#if defined(NILMTREE_HAVE_NEON)
    out.push_back("neon");
#endif
    return out;
}

}  // namespace nilmtree::kernels
