#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace nilmtree {

// splitmix64: cheap, well-mixed 64-bit hash used to derive independent
// RNG streams (per node, per window, per restart) from one base seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

// Shortest round-trip decimal form. Keeps serialized models and CSVs
// byte-stable for a given build without dragging printf locale rules in.
inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Runs fn(i) for i in [0, n). thread_count <= 1 stays on the caller's
// thread; otherwise a block partition across workers. fn must be safe to
// run concurrently for distinct i (callers write to disjoint slots).
inline void parallel_for(std::size_t n, int thread_count, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = thread_count <= 1 ? 1 : static_cast<std::size_t>(thread_count);
    if (workers > n) workers = n;
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = lo + chunk < n ? lo + chunk : n;
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline int default_thread_count() {
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace nilmtree
