#include <doctest.h>

#include <array>
#include <cmath>
#include <map>
#include <set>

#include "fsreal/device.hpp"
#include "fsreal/errors.hpp"

using namespace fsreal;

TEST_CASE("capability_from_index: weakest and strongest corners") {
    const auto weakest = capability_from_index(0);
    CHECK(weakest.cores == 1);
    CHECK(weakest.freq_ghz == 2.55);
    CHECK(weakest.memory_mb == 256);
    CHECK(weakest.net_level == 0);
    CHECK(weakest.net().delay_lo_s == 80.0);
    CHECK(weakest.net().up_kbps == 58000.0);

    const auto strongest = capability_from_index(71);
    CHECK(strongest.cores == 4);
    CHECK(strongest.freq_ghz == 3.3);
    CHECK(strongest.memory_mb == 1024);
    CHECK(strongest.net_level == 2);
    CHECK(strongest.net().delay_hi_s == 0.0);
    CHECK(strongest.net().down_kbps == 1024000.0);

    CHECK_THROWS_AS(capability_from_index(-1), ConfigError);
    CHECK_THROWS_AS(capability_from_index(72), ConfigError);
}

TEST_CASE("capability_from_index: bijective with correct factor counts") {
    std::set<std::array<int, 4>> seen;
    std::map<int, int> core_counts;
    std::map<double, int> freq_counts;
    std::map<int, int> mem_counts;
    std::map<int, int> net_counts;
    for (int i = 0; i < kNumCapabilities; ++i) {
        const auto cap = capability_from_index(i);
        CHECK(cap.capacity_index == i);
        seen.insert({cap.cores, static_cast<int>(cap.freq_ghz * 100), cap.memory_mb,
                     cap.net_level});
        ++core_counts[cap.cores];
        ++freq_counts[cap.freq_ghz];
        ++mem_counts[cap.memory_mb];
        ++net_counts[cap.net_level];
    }
    CHECK(seen.size() == 72);
    for (int c = 1; c <= 4; ++c) CHECK(core_counts[c] == 18);
    for (double f : {2.55, 2.9, 3.3}) CHECK(freq_counts[f] == 24);
    CHECK(mem_counts[256] == 36);
    CHECK(mem_counts[1024] == 36);
    for (int n = 0; n < 3; ++n) CHECK(net_counts[n] == 24);
}

TEST_CASE("beta_binomial_pmf: uniform at alpha=beta=1") {
    for (int i = 0; i < 72; ++i) {
        CHECK(std::abs(beta_binomial_pmf(i, 71, 1.0, 1.0) - 1.0 / 72.0) < 1e-12);
    }
}

TEST_CASE("beta_binomial_pmf: symmetric when alpha equals beta") {
    for (int i = 0; i < 72; ++i) {
        CHECK(std::abs(beta_binomial_pmf(i, 71, 10.0, 10.0) -
                       beta_binomial_pmf(71 - i, 71, 10.0, 10.0)) < 1e-12);
    }
}

TEST_CASE("beta_binomial_pmf: strong-heavy mode sits in the top quintile") {
    int argmax = 0;
    double best = -1.0;
    for (int i = 0; i < 72; ++i) {
        const double p = beta_binomial_pmf(i, 71, 10.0, 2.0);
        if (p > best) {
            best = p;
            argmax = i;
        }
    }
    CHECK(argmax >= 58);
}

TEST_CASE("beta_binomial_pmf: sums to one") {
    for (const auto& [a, b] : std::vector<std::pair<double, double>>{
             {10.0, 10.0}, {10.0, 2.0}, {0.2, 0.2}, {1.0, 1.0}, {3.5, 0.7}}) {
        double sum = 0.0;
        for (int i = 0; i < 72; ++i) sum += beta_binomial_pmf(i, 71, a, b);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(beta_binomial_pmf(0, 71, 0.0, 1.0), ConfigError);
}

TEST_CASE("sample_capacity_index: homo always returns the fixed index") {
    const auto dist = DeviceDistribution::homo(40);
    Rng rng(5);
    for (int i = 0; i < 100; ++i) CHECK(sample_capacity_index(dist, rng) == 40);
}

TEST_CASE("sample_capacity_index: uniform counts stay within 5 sigma") {
    const auto dist = DeviceDistribution::uniform();
    Rng rng(6);
    std::array<int, 72> counts{};
    for (int i = 0; i < 72000; ++i) ++counts[sample_capacity_index(dist, rng)];
    const double sigma = std::sqrt(72000.0 * (1.0 / 72.0) * (71.0 / 72.0));
    for (int i = 0; i < 72; ++i) {
        CHECK(std::abs(counts[i] - 1000.0) <= 5.0 * sigma);
    }
}

TEST_CASE("sample_capacity_index: beta-binomial empirical matches the pmf") {
    const auto dist = DeviceDistribution::beta_binomial(10.0, 10.0);
    Rng rng(7);
    std::array<int, 72> counts{};
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[sample_capacity_index(dist, rng)];
    double tv = 0.0;
    for (int i = 0; i < 72; ++i) {
        const double emp = static_cast<double>(counts[i]) / draws;
        tv += std::abs(emp - beta_binomial_pmf(i, 71, 10.0, 10.0));
    }
    CHECK(tv / 2.0 < 0.02);
}

TEST_CASE("response_time: hand arithmetic oracle") {
    // 1 MB over 58,000/173,000 kbps with no compute and no delay.
    NetworkProfile net{0.0, 0.0, 58000.0, 173000.0};
    CostParams cost;
    Rng rng(1);
    const double t = response_time(net, 1, 2.55, 1000000, 0, cost, rng);
    const double expect = 8e6 / 5.8e7 + 8e6 / 1.73e8;
    CHECK(std::abs(t - expect) < 1e-9);
    CHECK(std::abs(expect - 0.18418) < 1e-4);
}

TEST_CASE("response_time: all terms vanish") {
    NetworkProfile net{0.0, 0.0, 58000.0, 173000.0};
    CostParams cost;
    Rng rng(2);
    CHECK(response_time(net, 2, 2.9, 0, 0, cost, rng) == 0.0);
}

TEST_CASE("response_time: more cores means strictly faster") {
    CostParams cost;
    NetworkProfile net{0.0, 0.0, 100000.0, 100000.0};
    Rng rng1(3), rng2(3);
    const double slow = response_time(net, 1, 2.9, 1000, 50, cost, rng1);
    const double fast = response_time(net, 2, 2.9, 1000, 50, cost, rng2);
    CHECK(fast < slow);
}

TEST_CASE("response_time: monotone in bytes and samples") {
    CostParams cost;
    const auto cap = capability_from_index(30);
    Rng r1(4), r2(4), r3(4);
    const double base = response_time(cap, 1000, 10, cost, r1);
    const double more_bytes = response_time(cap, 2000, 10, cost, r2);
    const double more_samples = response_time(cap, 1000, 20, cost, r3);
    CHECK(more_bytes >= base);
    CHECK(more_samples >= base);
}

TEST_CASE("device pool: allocation clamps and never double-allocates") {
    DevicePool pool(10, DeviceDistribution::uniform(), 9);
    Rng rng(10);

    CHECK(pool.allocate(0, rng).empty());

    std::set<uint64_t> held;
    auto first = pool.allocate(4, rng);
    CHECK(first.size() == 4);
    held.insert(first.begin(), first.end());

    auto second = pool.allocate(100, rng);  // more than remain: clamp to 6
    CHECK(second.size() == 6);
    for (uint64_t id : second) CHECK(held.insert(id).second);
    CHECK(held.size() == 10);
    CHECK(pool.available_count() == 0);
    CHECK(pool.allocate(1, rng).empty());

    pool.release(first[0]);
    CHECK(pool.available_count() == 1);
    const auto third = pool.allocate(1, rng);
    REQUIRE(third.size() == 1);
    CHECK(third[0] == first[0]);
}

TEST_CASE("device pool: dropout marks idle devices offline until rerolled") {
    DevicePool pool(50, DeviceDistribution::uniform(), 11);
    Rng rng(12);
    pool.roll_dropout(1.0, rng);
    CHECK(pool.available_count() == 0);
    pool.roll_dropout(0.0, rng);
    CHECK(pool.available_count() == 50);
}
