#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "plcert/covering.hpp"
#include "plcert/errors.hpp"
#include "plcert/markov.hpp"
#include "plcert/orbits.hpp"

using namespace plcert;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

}  // namespace

TEST_SUITE("covering") {

TEST_CASE("eventual covering") {
    const PLMap tent = oracle::builtin_map("tent");
    const auto r = eventually_covers(tent, Interval(q(1, 4), q(1, 2)), Interval(q(0), q(1)), 10);
    CHECK(r.first_n == std::optional<unsigned>(2));
    CHECK(r.trajectory[0] == Interval(q(1, 2), q(1)));
    CHECK(r.trajectory[1] == Interval(q(0), q(1)));

    const PLMap r1 = oracle::builtin_map("remark1");
    const auto none = eventually_covers(r1, Interval(q(1), q(3)), Interval(q(1), q(9)), 50);
    CHECK_FALSE(none.first_n.has_value());
    CHECK(none.trajectory[0] == Interval(q(4), q(6)));
    CHECK(none.trajectory[1] == Interval(q(7), q(9)));
    CHECK(none.trajectory[2] == Interval(q(1), q(3)));
    CHECK(none.trajectory.size() == 50);

    const PLMap hat = oracle::builtin_map("remark4");
    const Interval whole(q(0), q(1));
    CHECK(eventually_covers(hat, whole, whole).first_n == std::optional<unsigned>(1));
    CHECK_THROWS_AS(eventually_covers(tent, Interval(q(0), q(2)), whole), DomainError);
}

TEST_CASE("point sets cover only points they land on") {
    const PLMap tent = oracle::builtin_map("tent");
    const auto r = eventually_covers(tent, Interval::point(q(0)), Interval::point(q(0)), 5);
    CHECK(r.first_n == std::optional<unsigned>(1));
    CHECK_FALSE(eventually_covers(tent, Interval::point(q(0)), Interval(q(0), q(1)), 5).first_n.has_value());
}

TEST_CASE("return times") {
    const PLMap tent = oracle::builtin_map("tent");
    const auto mix = return_times(tent, Interval(q(1, 8), q(1, 4)), Interval(q(3, 4), q(7, 8)), 64);
    CHECK(mix.cofinite_from == std::optional<unsigned>(2));

    const PLMap r1 = oracle::builtin_map("remark1");
    const auto blocks = return_times(r1, Interval(q(1), q(2)), Interval(q(7), q(8)), 30);
    CHECK(blocks.times == std::vector<unsigned>{2, 8, 11, 14, 17, 20, 23, 26, 29});
    CHECK(blocks.longest_run == 1);
    CHECK_FALSE(blocks.cofinite_from.has_value());
    for (auto t : blocks.times) {
        CHECK(t % 3 == 2);
    }

    const Interval around(q(1, 2), q(3, 4));
    CHECK(return_times(tent, around, around, 4).times.front() == 1);
}

TEST_CASE("intersection of return-time sets") {
    const PLMap tent = oracle::builtin_map("tent");
    const std::vector<std::pair<Interval, Interval>> pairs{
        {Interval(q(1, 10), q(1, 5)), Interval(q(3, 5), q(7, 10))},
        {Interval(q(7, 8), q(15, 16)), Interval(q(1, 3), q(3, 8))}};
    const auto rep = furstenberg_intersection_check(tent, pairs, 128);
    CHECK(rep.nonempty);
    CHECK(rep.longest_run >= 5);
    const auto single = furstenberg_intersection_check(tent, {pairs[0]}, 128);
    CHECK(single.times == return_times(tent, pairs[0].first, pairs[0].second, 128).times);

    const PLMap r1 = oracle::builtin_map("remark1");
    const auto mis = furstenberg_intersection_check(
        r1, {{Interval(q(1), q(2)), Interval(q(4), q(5))}, {Interval(q(1), q(2)), Interval(q(7), q(8))}}, 60);
    CHECK_FALSE(mis.nonempty);
}

TEST_CASE("period-n points inside U") {
    const PLMap tent = oracle::builtin_map("tent");
    CHECK(estimate_period_threshold(tent, Interval(q(1, 10), q(9, 10)), 8) == std::optional<unsigned>(1));
    // The 9-cycle visits 1, 2 and 3, while the period-8 orbits stay right of 3.
    CHECK(estimate_period_threshold(oracle::builtin_map("remark1"), Interval(q(1), q(3)), 9) == std::optional<unsigned>(9));
    CHECK_FALSE(estimate_period_threshold(oracle::builtin_map("remark1"), Interval(q(1), q(3)), 8).has_value());
    const PLMap hat = oracle::builtin_map("remark4");
    const auto whole = estimate_period_threshold(hat, hat.domain(), 8);
    const auto spectrum = period_spectrum(hat, 8);
    unsigned expect = 8;
    while (expect > 1 && spectrum.present.count(expect - 1)) {
        --expect;
    }
    CHECK(whole == std::optional<unsigned>(expect));
}

TEST_CASE("property: stepwise images equal composed images") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 40; ++trial) {
        const PLMap f = trial % 2 ? oracle::random_selfmap(rng, 3) : oracle::builtin_map("example7");
        const Interval k = oracle::random_subinterval(rng, f.domain());
        const auto r = eventually_covers(f, k, f.domain(), 8);
        for (unsigned n = 1; n <= 8; ++n) {
            CHECK(r.trajectory[n - 1] == image(iterate(f, n), k));
        }
    }
}

TEST_CASE("property: covering monotone in L; primitive cells cover each other") {
    std::mt19937_64 rng(52);
    const PLMap tent = oracle::builtin_map("tent");
    for (int trial = 0; trial < 40; ++trial) {
        const Interval k = oracle::random_subinterval(rng, tent.domain());
        const Interval l = oracle::random_subinterval(rng, tent.domain());
        const Interval l2 = oracle::random_subinterval(rng, l);
        const auto a = eventually_covers(tent, k, l, 64).first_n;
        const auto b = eventually_covers(tent, k, l2, 64).first_n;
        if (a && b) {
            CHECK(*b <= *a);
        }
    }
    for (const char* name : {"tent", "remark2:2", "remark2:3"}) {
        const PLMap f = oracle::builtin_map(name);
        const auto p = std::get<MarkovPartition>(detect_markov(f, 32));
        const auto g = graph_certificate(p, 4);
        REQUIRE(g.primitive);
        for (std::size_t i = 0; i < p.size(); ++i) {
            for (std::size_t j = 0; j < p.size(); ++j) {
                const auto r = eventually_covers(f, p.cell(i), p.cell(j), 32);
                REQUIRE(r.first_n.has_value());
                CHECK(*r.first_n <= *g.primitivity_exponent + p.size());
            }
        }
    }
}

TEST_CASE("property: return-time shift law") {
    // If f^n(U) meets V and f(V) lies inside V', then f^{n+1}(U) meets V'.
    std::mt19937_64 rng(53);
    const PLMap tent = oracle::builtin_map("tent");
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Interval u = oracle::random_subinterval(rng, tent.domain(), 64);
        const Interval v = oracle::random_subinterval(rng, tent.domain(), 64);
        const Interval fv = image(tent, v);
        const Interval vp(max(q(0), fv.lo - q(1, 64)), fv.hi);
        const auto a = return_times(tent, u, v, 20);
        const auto b = return_times(tent, u, vp, 21);
        for (auto n : a.times) {
            ++checked;
            CHECK(std::binary_search(b.times.begin(), b.times.end(), n + 1));
        }
    }
    CHECK(checked > 1000);
}

}
