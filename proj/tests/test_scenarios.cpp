#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

#include <gridhc/feeders.hpp>
#include <gridhc/scenarios.hpp>

using namespace gridhc;

TEST_CASE("scenario streams are frozen across releases", "[scenarios][rng]") {
    // mt19937_64 seeded via seed_seq and the rejection draw are fully specified
    // by the standard, so these constants hold on every platform. A change here
    // means the stream definition changed and every seeded study shifts.
    struct Case {
        std::uint64_t seed, index;
        std::uint64_t first, second, third;
    };
    for (const auto& c : {Case{1, 0, 7712288819789024404ULL, 6069372287434807842ULL,
                               2874520805244216285ULL},
                          Case{1, 1, 4998592052616679661ULL, 3416129078208870830ULL,
                               3977724874018074725ULL},
                          Case{2, 0, 12470991958105716804ULL, 854176372141369740ULL,
                               9019019277419366395ULL},
                          Case{0x123456789abcdef0ULL, 7, 11374298111990520640ULL,
                               6006767637744636182ULL, 8063892593768092884ULL}}) {
        ScenarioRng rng(c.seed, c.index);
        CHECK(rng.next() == c.first);
        CHECK(rng.next() == c.second);
        CHECK(rng.next() == c.third);
    }

    ScenarioRng r42(42, 0);
    CHECK(sample_scenario(r42, 10, 3).omega == std::vector<int>{2, 5, 6});
    ScenarioRng r42b(42, 1);
    CHECK(sample_scenario(r42b, 10, 3).omega == std::vector<int>{0, 2, 6});
    ScenarioRng r7(7, 0);
    CHECK(sample_scenario(r7, 55, 6).omega == std::vector<int>{4, 10, 12, 21, 28, 52});

    ScenarioRng rb(1, 2);
    std::vector<int> draws;
    for (int k = 0; k < 6; ++k) draws.push_back(rb.bounded(10));
    CHECK(draws == std::vector<int>{2, 4, 0, 4, 7, 1});
}

TEST_CASE("scenario sets are reproducible and well-formed", "[scenarios][sampling]") {
    auto a = sample_scenario_set(9001, 500, 55, 6);
    auto b = sample_scenario_set(9001, 500, 55, 6);
    REQUIRE(a.size() == 500);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].omega == b[i].omega);
        CHECK(a[i].seed_id == static_cast<std::int64_t>(i));
        CHECK(a[i].n_gen() == 6);
        CHECK(std::is_sorted(a[i].omega.begin(), a[i].omega.end()));
        CHECK(std::adjacent_find(a[i].omega.begin(), a[i].omega.end()) == a[i].omega.end());
        CHECK(a[i].omega.front() >= 0);
        CHECK(a[i].omega.back() < 55);
    }

    auto c = sample_scenario_set(9002, 20, 55, 6);
    int same = 0;
    for (std::size_t i = 0; i < c.size(); ++i) same += (c[i].omega == a[i].omega);
    CHECK(same < 20); // different study seed draws a different set
}

TEST_CASE("streams key on the scenario index, not the generator count", "[scenarios][sampling]") {
    // A partial shuffle with a longer prefix replays the shorter one, so the
    // placements at a lower penetration are a subset of those at a higher one
    // for the same (seed, index). Bisection leans on this coupling.
    auto small = sample_scenario_set(123, 200, 55, 6);
    auto large = sample_scenario_set(123, 200, 55, 28);
    for (std::size_t i = 0; i < small.size(); ++i)
        CHECK(std::includes(large[i].omega.begin(), large[i].omega.end(),
                            small[i].omega.begin(), small[i].omega.end()));
}

TEST_CASE("placements are uniform over loads", "[scenarios][sampling][statistical]") {
    SECTION("8 loads, 2 generators") {
        const int n_mc = 40000, n_lds = 8, n_gen = 2;
        std::vector<int> hits(n_lds, 0);
        for (const auto& s : sample_scenario_set(3, n_mc, n_lds, n_gen))
            for (int k : s.omega) ++hits[static_cast<std::size_t>(k)];
        for (int h : hits)
            CHECK(std::abs(h / static_cast<double>(n_mc) - 0.25) <= 0.01);
    }
    SECTION("55 loads, 28 generators") {
        const int n_mc = 20000, n_lds = 55, n_gen = 28;
        std::vector<int> hits(n_lds, 0);
        for (const auto& s : sample_scenario_set(4, n_mc, n_lds, n_gen))
            for (int k : s.omega) ++hits[static_cast<std::size_t>(k)];
        const double expect = 28.0 / 55.0;
        for (int h : hits)
            CHECK(std::abs(h / static_cast<double>(n_mc) - expect) <= 0.02);
    }
}

TEST_CASE("full penetration selects every load exactly once", "[scenarios][sampling]") {
    ScenarioRng rng(5, 0);
    Scenario s = sample_scenario(rng, 9, 9);
    std::vector<int> all(9);
    std::iota(all.begin(), all.end(), 0);
    CHECK(s.omega == all);
}

TEST_CASE("generator count bounds are enforced", "[scenarios][sampling]") {
    ScenarioRng rng(5, 0);
    CHECK_THROWS_AS(sample_scenario(rng, 9, 0), Error);
    CHECK_THROWS_AS(sample_scenario(rng, 9, 10), Error);
    CHECK_THROWS_AS(sample_scenario_set(1, 0, 9, 1), Error);
}

TEST_CASE("indicator marks the node row of each selected load", "[scenarios][indicator]") {
    NetworkModel net = make_synth10();
    auto ord = make_ordering(net);

    Scenario s;
    s.omega = {1, 4, 7};
    IndicatorVector ind = indicator(s, ord);
    REQUIRE(ind.lambda.size() == ord.n_l_rows());
    CHECK(ind.lambda.sum() == 3.0);
    for (int k : s.omega)
        CHECK(ind.lambda[ord.load_node_rows[static_cast<std::size_t>(k)]] == 1.0);
    for (int r = 0; r < ind.lambda.size(); ++r)
        CHECK((ind.lambda[r] == 0.0 || ind.lambda[r] == 1.0));

    SECTION("full penetration covers every load row and nothing else") {
        Scenario full;
        full.omega.resize(net.loads.size());
        std::iota(full.omega.begin(), full.omega.end(), 0);
        IndicatorVector all = indicator(full, ord);
        CHECK(all.lambda.sum() == static_cast<double>(net.n_lds()));
        for (int row : ord.load_node_rows) CHECK(all.lambda[row] == 1.0);
    }

    SECTION("out-of-range load index is rejected") {
        Scenario bad;
        bad.omega = {99};
        CHECK_THROWS_AS(indicator(bad, ord), Error);
    }
}

TEST_CASE("penetration arithmetic", "[scenarios][penetration]") {
    CHECK(penetration(2, 8) == 0.25);
    CHECK(penetration(55, 55) == 1.0);
    CHECK_THROWS_AS(penetration(1, 0), Error);

    CHECK(n_gen_for_penetration(0.5, 10) == 5);
    CHECK(n_gen_for_penetration(0.25, 10) == 3); // round half away from zero
    CHECK(n_gen_for_penetration(1.0, 55) == 55);
    CHECK(n_gen_for_penetration(0.01, 55) == 1);
    CHECK(n_gen_for_penetration(0.001, 55) == 1); // clamped up to one generator
    CHECK(n_gen_for_penetration(0.1, 55) == 6);
    CHECK_THROWS_AS(n_gen_for_penetration(0.0, 10), Error);
    CHECK_THROWS_AS(n_gen_for_penetration(1.5, 10), Error);
    CHECK_THROWS_AS(n_gen_for_penetration(-0.1, 10), Error);
}

TEST_CASE("bounded draws stay in range", "[scenarios][rng]") {
    ScenarioRng rng(99, 3);
    for (int n : {1, 2, 3, 7, 55}) {
        for (int k = 0; k < 200; ++k) {
            int x = rng.bounded(n);
            CHECK(x >= 0);
            CHECK(x < n);
        }
    }
}
