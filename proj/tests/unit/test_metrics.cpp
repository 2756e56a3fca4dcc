#include <random>

#include "doctest.h"
#include "nilmtree/errors.hpp"
#include "nilmtree/metrics.hpp"

using namespace nilmtree;

TEST_CASE("sample credit hand cases") {
    // truth 10, estimate 5: everything estimated is right, half the truth missed
    auto c = sample_credit(10, 5);
    CHECK(c.tp == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.fp == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.fn == doctest::Approx(0.5).epsilon(1e-12));

    // truth 5, estimate 10: half the estimate is phantom, nothing missed
    c = sample_credit(5, 10);
    CHECK(c.tp == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.fp == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c.fn == doctest::Approx(0.0).epsilon(1e-12));

    // zero denominators contribute nothing
    c = sample_credit(0, 0);
    CHECK(c.tp == 0.0);
    CHECK(c.fp == 0.0);
    CHECK(c.fn == 0.0);
    c = sample_credit(7, 0);
    CHECK(c.tp == 0.0);
    CHECK(c.fp == 0.0);
    CHECK(c.fn == 1.0);
    c = sample_credit(0, 7);
    CHECK(c.tp == 0.0);
    CHECK(c.fp == 1.0);
    CHECK(c.fn == 0.0);
}

TEST_CASE("credits are scale invariant") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 500);
    for (int i = 0; i < 200; ++i) {
        double x = u(rng), xh = u(rng);
        auto a = sample_credit(x, xh);
        auto b = sample_credit(8 * x, 8 * xh);  // power-of-two scale: exact in binary
        CHECK(a.tp == b.tp);
        CHECK(a.fp == b.fp);
        CHECK(a.fn == b.fn);
        if (xh > 0) CHECK(a.tp + a.fp == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("one-device f score from the hand case") {
    // constant truth 10, constant estimate 5 over any length:
    // p = 1, r = tp/(tp+fn) = 1/1.5 = 2/3, f = 2*(2/3)/(5/3) = 0.8
    std::vector<double> truth(4, 10.0), est(4, 5.0);
    auto s = score_device("dev", truth, est);
    CHECK(s.precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(s.f == doctest::Approx(0.8).epsilon(1e-12));
    // nde = 4*25 / (4*100) = 0.25
    CHECK(s.nde == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(nde(truth, est) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("nde rejects an all-zero truth and mismatched lengths") {
    CHECK_THROWS_AS(nde({0, 0}, {1, 1}), DataError);
    CHECK_THROWS_AS(nde({1, 2}, {1}), DataError);
}

TEST_CASE("macro f combines per-device precision and recall") {
    // device a: p=1, r=2/3; device b: estimate 0 everywhere -> p=0, r=0
    std::vector<std::string> names{"a", "b"};
    std::vector<std::vector<double>> truth{{10, 10}, {4, 4}};
    std::vector<std::vector<double>> est{{5, 5}, {0, 0}};
    auto r = score_all(names, truth, est);
    CHECK(r.macro_precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.macro_recall == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(r.macro_f == doctest::Approx(2 * 0.5 * (1.0 / 3) / (0.5 + 1.0 / 3)).epsilon(1e-12));
    // micro pools credits: tp=2, fp=0, fn=1+2 -> p=1, r=2/5
    CHECK(r.micro_precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.micro_recall == doctest::Approx(0.4).epsilon(1e-12));
    // overall nde pools squared error: (2*25 + 2*16) / (2*100 + 2*16)
    CHECK(r.overall_nde == doctest::Approx((50.0 + 32.0) / (200.0 + 32.0)).epsilon(1e-12));
    REQUIRE(r.devices.size() == 2);
    CHECK(r.devices[1].f == 0.0);  // 0/0 convention, not NaN
    CHECK(r.devices[1].nde == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("score_all validates shapes") {
    CHECK_THROWS_AS(score_all({}, {}, {}), DataError);
    CHECK_THROWS_AS(score_all({"a"}, {{1, 2}}, {{1}}), DataError);
    CHECK_THROWS_AS(score_all({"a", "b"}, {{1}}, {{1}}), DataError);
}

TEST_CASE("perfect estimates score 1 / 1 / 1 / 0") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 300);
    std::vector<double> t(50);
    for (auto& v : t) v = u(rng);
    auto s = score_device("d", t, t);
    CHECK(s.precision == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.f == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.nde == 0.0);
}
