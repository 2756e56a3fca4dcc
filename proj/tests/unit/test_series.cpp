#include <numeric>
#include <random>

#include "doctest.h"
#include "nilmtree/errors.hpp"
#include "nilmtree/series.hpp"

using namespace nilmtree;

TEST_CASE("make_series enforces channel invariants") {
    CHECK_THROWS_AS(make_series("d", 0, 60, {}), DataError);
    CHECK_THROWS_AS(make_series("d", 0, 0, {1.0}), DataError);
    CHECK_THROWS_AS(make_series("d", 0, -5, {1.0}), DataError);
    CHECK_THROWS_AS(make_series("d", 0, 60, {1.0, -0.5}), DataError);
    CHECK_THROWS_AS(make_series("d", 0, 60, {1.0, std::nan("")}), DataError);
    auto s = make_series("d", 100, 60, {0.0, 2.5});
    CHECK(s.size() == 2);
    CHECK(s.start_time == 100);
}

TEST_CASE("resample mean-pools and drops the trailing partial group") {
    auto s = make_series("d", 0, 10, {1, 2, 3, 4, 5});
    auto r = resample(s, 20);
    CHECK(r.interval == 20);
    CHECK(r.values == std::vector<double>{1.5, 3.5});
    CHECK_THROWS_AS(resample(s, 15), DataError);  // not an integer multiple
    CHECK_THROWS_AS(resample(s, 0), DataError);
    CHECK(resample(s, 10).values == s.values);
}

TEST_CASE("resample preserves mean power of the pooled prefix") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 300);
    std::vector<double> v(97);
    for (auto& x : v) x = u(rng);
    auto s = make_series("d", 0, 7, v);
    auto r = resample(s, 28);  // ratio 4; 97 -> 24 groups, one sample dropped
    REQUIRE(r.size() == 24);
    double fine = std::accumulate(v.begin(), v.begin() + 96, 0.0);
    double coarse = std::accumulate(r.values.begin(), r.values.end(), 0.0) * 4;
    CHECK(coarse == doctest::Approx(fine).epsilon(1e-12));
}

TEST_CASE("resampling a house maps unreliable ranges with overlap rounding") {
    HouseData h;
    h.devices.push_back(make_series("a", 0, 10, std::vector<double>(10, 1.0)));
    h.unreliable.push_back({3, 7});
    auto r = resample(h, 20);
    REQUIRE(r.unreliable.size() == 1);
    CHECK(r.unreliable[0].first == 1);   // sample 3 falls in coarse group 1
    CHECK(r.unreliable[0].second == 4);  // sample 6 falls in coarse group 3
}

TEST_CASE("train/test split is a temporal prefix/suffix") {
    HouseData h;
    h.devices.push_back(make_series("a", 0, 60, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
    h.devices.push_back(make_series("b", 0, 60, std::vector<double>(10, 5.0)));
    h.mains = make_series("mains", 0, 60, std::vector<double>(10, 5.0));
    h.unreliable.push_back({6, 9});
    auto [tr, te] = split_train_test(h, 0.8);
    CHECK(tr.sample_count() == 8);
    CHECK(te.sample_count() == 2);
    CHECK(te.devices[0].values == std::vector<double>{8, 9});
    CHECK(te.devices[0].start_time == 8 * 60);
    REQUIRE(tr.mains);
    CHECK(tr.mains->size() == 8);
    // the unreliable range straddles the cut: [6,8) stays, [0,1) moves
    REQUIRE(tr.unreliable.size() == 1);
    CHECK(tr.unreliable[0] == SampleRange{6, 8});
    REQUIRE(te.unreliable.size() == 1);
    CHECK(te.unreliable[0] == SampleRange{0, 1});

    CHECK_THROWS_AS(split_train_test(h, 0.0), DataError);
    CHECK_THROWS_AS(split_train_test(h, 1.0), DataError);
    CHECK_THROWS_AS(split_train_test(h, 0.01), DataError);  // empty training part
}

TEST_CASE("windows slide while the full window fits") {
    auto s = make_series("d", 0, 1, {1, 2, 3, 4, 5});
    auto wm = windows(s, 3);
    REQUIRE(wm.count() == 3);
    CHECK(wm.cols[0] == std::vector<double>{1, 2, 3});
    CHECK(wm.cols[2] == std::vector<double>{3, 4, 5});
    auto wm2 = windows(s, 3, 2);
    REQUIRE(wm2.count() == 2);
    CHECK(wm2.cols[1] == std::vector<double>{3, 4, 5});
    CHECK(windows(s, 5).count() == 1);
    CHECK_THROWS_AS(windows(s, 6), DataError);
    CHECK_THROWS_AS(windows(s, 0), DataError);
    CHECK_THROWS_AS(windows(s, 3, 0), DataError);
}

TEST_CASE("pseudo signals sum the selected channels in house order") {
    HouseData h;
    h.devices.push_back(make_series("a", 0, 60, {1, 2}));
    h.devices.push_back(make_series("b", 0, 60, {10, 20}));
    h.devices.push_back(make_series("c", 0, 60, {100, 200}));
    auto p = pseudo_signal(h, std::vector<std::string>{"c", "a"});
    CHECK(p.device_id == "a+c");  // joined in house order, not request order
    CHECK(p.values == std::vector<double>{101, 202});
    CHECK(aggregate_sum(h).values == std::vector<double>{111, 222});
    CHECK_THROWS_AS(pseudo_signal(h, std::vector<std::string>{"nope"}), DataError);
    CHECK_THROWS_AS(pseudo_signal(h, std::vector<std::string>{}), DataError);
    CHECK(h.device_index("b") == 1);
    CHECK(h.device_index("zz") == -1);
}

TEST_CASE("validate_house rejects misaligned channels") {
    HouseData h;
    h.devices.push_back(make_series("a", 0, 60, {1, 2}));
    h.devices.push_back(make_series("b", 0, 60, {1, 2, 3}));
    CHECK_THROWS_AS(validate_house(h), DataError);
    h.devices[1].values.pop_back();
    CHECK_NOTHROW(validate_house(h));
    h.devices[1].device_id = "a";  // duplicate id
    CHECK_THROWS_AS(validate_house(h), DataError);
}
