#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "plcert/chaos.hpp"
#include "plcert/errors.hpp"

using namespace plcert;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

/// Decides the three conditions by scanning a fine rational grid plus all
/// nodes. Used only on maps where the verdict is robust to sampling.
Verdict grid_verdict(const PLMap& f) {
    const auto fixed = fixed_points(f);
    std::vector<Rational> zs;
    for (const auto& s : fixed) {
        if (f.domain().contains_in_interior(s.where.lo)) {
            zs.push_back(s.where.lo);
        }
    }
    std::vector<Rational> xs;
    const Interval d = f.domain();
    for (long i = 0; i <= 2000; ++i) {
        xs.push_back(d.lo + d.width() * Rational(i, 2000));
    }
    for (const auto& n : f.nodes()) {
        xs.push_back(n.x);
    }
    for (const auto& z : zs) {
        for (const auto& c : xs) {
            const Rational fc = oracle::eval_scan(f, c);
            if ((fc <= c && c < z) || (z < c && c <= fc)) {
                return Verdict::Cond1;
            }
        }
    }
    for (const auto& z : zs) {
        for (const auto& c : xs) {
            const Rational fc = oracle::eval_scan(f, c);
            if ((c < fc && fc < z) || (z < fc && fc < c)) {
                return Verdict::Cond2;
            }
        }
    }
    if (fixed.size() == 1 && zs.size() == 1) {
        const Rational z = zs.front();
        for (const auto& c : xs) {
            const Rational fc = oracle::eval_scan(f, c);
            if ((c < z && fc < z) || (z < c && z < fc)) {
                return Verdict::None;
            }
        }
        return Verdict::Cond3;
    }
    return Verdict::None;
}

}  // namespace

TEST_SUITE("chaos") {

TEST_CASE("classification of corpus maps") {
    const auto tent = classify_conditions(oracle::builtin_map("tent"));
    // Frozen from the grid oracle: 0 is a fixed point left of 2/3.
    CHECK(tent.verdict == Verdict::Cond1);
    CHECK(grid_verdict(oracle::builtin_map("tent")) == Verdict::Cond1);
    CHECK(tent.fixed_point == q(2, 3));
    CHECK(tent.witness == q(0));
    CHECK(recheck(oracle::builtin_map("tent"), tent));

    const PLMap hat = oracle::builtin_map("remark4");
    const auto c3 = classify_conditions(hat);
    CHECK(c3.verdict == Verdict::Cond3);
    CHECK(c3.fixed_point == q(1, 2));
    CHECK(recheck(hat, c3));
    CHECK(grid_verdict(hat) == Verdict::Cond3);

    for (const char* name : {"remark2:2", "remark2:3", "remark2:4"}) {
        const PLMap f = oracle::builtin_map(name);
        const auto c = classify_conditions(f);
        CHECK(c.verdict == Verdict::Cond2);
        CHECK(recheck(f, c));
        CHECK(grid_verdict(f) == Verdict::Cond2);
    }
    const auto c2 = classify_conditions(oracle::builtin_map("remark2:2"));
    CHECK(c2.fixed_point == q(10, 3));
    CHECK(c2.witness == q(1));
}

TEST_CASE("classification edge cases") {
    const PLMap contraction({Node{q(0), q(0)}, Node{q(1), q(1, 2)}});
    CHECK_THROWS_AS(classify_conditions(contraction), NoInteriorFixedPoint);
    const PLMap seg({Node{q(0), q(1, 2)}, Node{q(1, 4), q(1, 4)}, Node{q(3, 4), q(3, 4)}, Node{q(1), q(1, 2)}});
    const auto c = classify_conditions(seg);
    CHECK(c.verdict == Verdict::None);
    CHECK_FALSE(c.note.empty());
}

TEST_CASE("COND3 maps send each side across the fixed point") {
    const PLMap hat = oracle::builtin_map("remark4");
    const Rational z(1, 2);
    CHECK(Interval(z, q(1)).contains(image(hat, Interval(q(0), z))));
    CHECK(Interval(q(0), z).contains(image(hat, Interval(z, q(1)))));
}

TEST_CASE("turbulence") {
    const auto tent = find_turbulence(oracle::builtin_map("tent"));
    REQUIRE(std::holds_alternative<TurbulenceCertificate>(tent));
    const auto& c = std::get<TurbulenceCertificate>(tent);
    CHECK(c.pair.j0 == Interval(q(0), q(1, 2)));
    CHECK(c.pair.j1 == Interval(q(1, 2), q(1)));

    for (const char* name : {"remark2:2", "remark2:3", "remark2:4"}) {
        const auto r = find_turbulence(oracle::builtin_map(name));
        REQUIRE(std::holds_alternative<TurbulenceNotFound>(r));
        CHECK(std::get<TurbulenceNotFound>(r).exhaustive);
    }
    const PLMap hat = oracle::builtin_map("remark4");
    const auto r = find_turbulence(hat);
    REQUIRE(std::holds_alternative<TurbulenceNotFound>(r));
    CHECK(std::get<TurbulenceNotFound>(r).exhaustive);
    CHECK(std::holds_alternative<TurbulenceCertificate>(find_turbulence(iterate(hat, 2))));
}

TEST_CASE("double turbulence") {
    const auto t2 = find_double_turbulence(iterate(oracle::builtin_map("tent"), 2));
    REQUIRE(std::holds_alternative<TurbulenceCertificate>(t2));
    const auto& c = std::get<TurbulenceCertificate>(t2);
    CHECK(c.level == TurbulenceLevel::DoublyTurbulent);
    CHECK(c.host0 == Interval(q(0), q(1, 2)));
    CHECK(c.host1 == Interval(q(2, 3), q(5, 6)));
    CHECK(Interval(q(1, 2), q(1)).contains(*c.host1));

    const PLMap hat = oracle::builtin_map("remark4");
    const auto h2 = find_double_turbulence(iterate(hat, 2));
    REQUIRE(std::holds_alternative<TurbulenceCertificate>(h2));
    const auto& hc = std::get<TurbulenceCertificate>(h2);
    CHECK(hc.host0 == Interval(q(0), q(1, 2)));
    CHECK(hc.host1 == Interval(q(1, 2), q(1)));
    CHECK(verify_certificate(iterate(hat, 2), hc));

    const PLMap f2 = oracle::builtin_map("remark2:2");
    CHECK(std::holds_alternative<TurbulenceNotFound>(find_double_turbulence(f2)));
    CHECK(std::holds_alternative<TurbulenceCertificate>(find_double_turbulence(iterate(f2, 2))));
}

TEST_CASE("invariant interval check") {
    const PLMap hat = oracle::builtin_map("remark4");
    const auto r = check_invariant_halves(hat, Interval(q(0), q(1, 2)), 2);
    CHECK(r.pass);
    CHECK(r.image_twice == Interval(q(0), q(1, 2)));
    REQUIRE(r.components.size() == 1);
    CHECK(r.components[0].image_twice == Interval(q(1, 2), q(1)));
    CHECK_THROWS_AS(check_invariant_halves(oracle::builtin_map("tent"), Interval(q(0), q(1, 2)), 1), HypothesisFailed);
    const PLMap id = identity_map(Interval(q(0), q(1)));
    CHECK(check_invariant_halves(id, Interval(q(1, 4), q(1, 2)), 1).pass);
}

TEST_CASE("property: every certificate re-verifies; classification is deterministic") {
    std::mt19937_64 rng(31);
    int found = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const PLMap f = trial % 2 ? oracle::random_selfmap(rng, 2 + trial % 5)
                                  : oracle::random_integer_markov(rng, 2 + trial % 4);
        for (const auto& r : {find_turbulence(f), find_double_turbulence(f)}) {
            if (const auto* c = std::get_if<TurbulenceCertificate>(&r)) {
                ++found;
                CHECK(verify_certificate(f, *c));
                CHECK_FALSE(c->pair.j0.overlaps_interior(c->pair.j1));
            }
        }
        try {
            const auto a = classify_conditions(f);
            const auto b = classify_conditions(f);
            CHECK(a.verdict == b.verdict);
            CHECK(a.witness == b.witness);
            CHECK(recheck(f, a));
        } catch (const NoInteriorFixedPoint&) {
        }
    }
    CHECK(found > 50);
}

TEST_CASE("property: turbulence search agrees with interval-pair brute force on integer Markov maps") {
    // Brute force: every pair of unions of consecutive cells.
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 60; ++trial) {
        const int k = 2 + trial % 3;
        const PLMap f = oracle::random_integer_markov(rng, k);
        bool brute = false;
        for (int a = 0; a <= k && !brute; ++a) {
            for (int b = a + 1; b <= k && !brute; ++b) {
                for (int c = b; c <= k && !brute; ++c) {
                    for (int d = c + 1; d <= k && !brute; ++d) {
                        const Interval j0(q(a), q(b)), j1(q(c), q(d));
                        const Interval i0 = oracle::image_power(f, j0, 1);
                        const Interval i1 = oracle::image_power(f, j1, 1);
                        brute = i0.contains(j0) && i0.contains(j1) && i1.contains(j0) && i1.contains(j1);
                    }
                }
            }
        }
        const auto r = find_turbulence(f);
        if (brute) {
            CHECK(std::holds_alternative<TurbulenceCertificate>(r));
        }
        if (const auto* nf = std::get_if<TurbulenceNotFound>(&r)) {
            CHECK_FALSE(brute);
            CHECK(nf->exhaustive);
        }
    }
}

}
