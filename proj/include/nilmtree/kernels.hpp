#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Flat arithmetic kernels behind the clustering / decoding hot loops.
// Every kernel has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected once at runtime. SIMD
// variants may reassociate sums; callers must not rely on bitwise
// agreement with the scalar path across backends.

namespace nilmtree::kernels {

using ReduceFn2 = double (*)(const double*, const double*, std::size_t);
using ReduceFn3 = double (*)(const double*, const double*, const double*, std::size_t);
using AccumFn = void (*)(double*, const double*, std::size_t);

struct Ops {
    const char* name;
    ReduceFn2 l1_distance;       // sum |a - b|
    ReduceFn2 squared_distance;  // sum (a - b)^2
    ReduceFn3 pair_residual_sq;  // sum (y - a - b)^2
    AccumFn accumulate;          // acc += x, elementwise
};

// Reference implementation, always present.
const Ops& scalar_ops();

// Currently selected implementation. First call picks the widest variant
// the CPU supports, unless NILMTREE_KERNELS or force() overrode it.
const Ops& active();

// Select by name: "scalar", "avx2", "neon" or "auto". Throws ConfigError
// for unknown names or variants this build/CPU cannot run.
void force(const std::string& name);

// Names runnable on this machine, reference first.
std::vector<std::string> available();

// Convenience wrappers over active().
inline double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    return active().l1_distance(a.data(), b.data(), a.size());
}
inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace nilmtree::kernels
