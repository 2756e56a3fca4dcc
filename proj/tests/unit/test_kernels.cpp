#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "nilmtree/errors.hpp"
#include "nilmtree/kernels.hpp"

using namespace nilmtree;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar kernels match naive formulas") {
    std::mt19937_64 rng(11);
    const auto& ops = kernels::scalar_ops();
    for (std::size_t n : {1u, 2u, 3u, 7u, 16u, 33u}) {
        auto a = random_vec(rng, n, -50, 50);
        auto b = random_vec(rng, n, -50, 50);
        auto y = random_vec(rng, n, -50, 50);
        double l1 = 0, sq = 0, rs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            l1 += std::abs(a[i] - b[i]);
            sq += (a[i] - b[i]) * (a[i] - b[i]);
            rs += (y[i] - a[i] - b[i]) * (y[i] - a[i] - b[i]);
        }
        CHECK(ops.l1_distance(a.data(), b.data(), n) == doctest::Approx(l1).epsilon(1e-12));
        CHECK(ops.squared_distance(a.data(), b.data(), n) == doctest::Approx(sq).epsilon(1e-12));
        CHECK(ops.pair_residual_sq(y.data(), a.data(), b.data(), n) ==
              doctest::Approx(rs).epsilon(1e-12));
        auto acc = y;
        ops.accumulate(acc.data(), a.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(acc[i] == y[i] + a[i]);
    }
}

TEST_CASE("every available variant agrees with scalar") {
    std::mt19937_64 rng(29);
    auto names = kernels::available();
    REQUIRE(!names.empty());
    CHECK(names.front() == std::string("scalar"));

    // sizes straddle the vector width so tails get exercised
    for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 15u, 64u, 101u}) {
        auto a = random_vec(rng, n, 0, 2000);
        auto b = random_vec(rng, n, 0, 2000);
        auto y = random_vec(rng, n, 0, 4000);
        const auto& ref = kernels::scalar_ops();
        double l1 = ref.l1_distance(a.data(), b.data(), n);
        double sq = ref.squared_distance(a.data(), b.data(), n);
        double rs = ref.pair_residual_sq(y.data(), a.data(), b.data(), n);
        for (const auto& name : names) {
            kernels::force(name);
            const auto& ops = kernels::active();
            double tol = 1e-12 * static_cast<double>(n);
            CHECK(ops.l1_distance(a.data(), b.data(), n) ==
                  doctest::Approx(l1).epsilon(tol).scale(1));
            CHECK(ops.squared_distance(a.data(), b.data(), n) ==
                  doctest::Approx(sq).epsilon(tol).scale(1));
            CHECK(ops.pair_residual_sq(y.data(), a.data(), b.data(), n) ==
                  doctest::Approx(rs).epsilon(tol).scale(1));
            auto acc_ref = y, acc = y;
            ref.accumulate(acc_ref.data(), a.data(), n);
            ops.accumulate(acc.data(), a.data(), n);
            CHECK(acc == acc_ref);  // accumulate has no reassociation latitude
        }
    }
    kernels::force("auto");
}

TEST_CASE("force rejects unknown and unavailable names") {
    CHECK_THROWS_AS(kernels::force("sse9"), ConfigError);
    auto names = kernels::available();
    bool has_neon = false;
    for (const auto& n : names) has_neon = has_neon || n == "neon";
    if (!has_neon) CHECK_THROWS_AS(kernels::force("neon"), ConfigError);
    kernels::force("scalar");
    CHECK(kernels::active().name == std::string("scalar"));
    kernels::force("auto");
}
