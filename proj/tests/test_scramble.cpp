#include <random>

#include "doctest.h"
#include "oracle.hpp"
#include "plcert/errors.hpp"
#include "plcert/json_io.hpp"
#include "plcert/scramble.hpp"

using namespace plcert;

namespace {

Rational q(long n, long d = 1) { return Rational(n, d); }

const ScrambleCertificate& tent_two() {
    static const ScrambleCertificate cert = [] {
        ScrambleConfig cfg(oracle::builtin_map("tent"));
        cfg.stages = 2;
        return build_scramble(cfg);
    }();
    return cert;
}

std::vector<const ScrambleStep*> all_steps(const ScrambleCertificate& c) {
    std::vector<const ScrambleStep*> out;
    for (const auto& st : c.stages) {
        for (const auto& s : st.steps) {
            out.push_back(&s);
        }
    }
    return out;
}

ScrambleStep& step_at(ScrambleCertificate& c, std::size_t i) {
    for (auto& st : c.stages) {
        if (i < st.steps.size()) {
            return st.steps[i];
        }
        i -= st.steps.size();
    }
    throw std::out_of_range("step index");
}

const Leaf& leaf_named(const ScrambleStage& st, const std::string& word) {
    for (const auto& l : st.leaves) {
        if (l.id.seed == 1 && l.id.word == word) {
            return l;
        }
    }
    throw std::out_of_range(word);
}

}  // namespace

TEST_SUITE("scramble") {

TEST_CASE("defaults") {
    ScrambleConfig cfg(oracle::builtin_map("tent"));
    CHECK(base_open(cfg, 1) == Interval(q(0), q(1, 2)));
    CHECK(base_open(cfg, 2) == Interval(q(1, 2), q(1)));
    CHECK(base_open(cfg, 3) == Interval(q(0), q(1, 4)));
    CHECK(base_open(cfg, 6) == Interval(q(3, 4), q(1)));
    CHECK(base_open(cfg, 7) == Interval(q(0), q(1, 8)));
    CHECK(separation_targets(cfg, 1) == std::make_pair(q(1, 8), q(7, 8)));
    CHECK(separation_targets(cfg, 2) == std::make_pair(q(1, 16), q(15, 16)));
    CHECK(scramble_window(cfg.f.domain(), q(2, 3), 4) == Interval(q(29, 48), q(35, 48)));
    CHECK(scramble_window(cfg.f.domain(), q(0), 4) == Interval(q(0), q(1, 16)));
    CHECK(omega_code("011") == "001011");
    CHECK(TimeProgression{2, 3}.contains(8));
    CHECK_FALSE(TimeProgression{2, 3}.contains(9));
}

TEST_CASE("zero stages hold only the first seed") {
    ScrambleConfig cfg(oracle::builtin_map("tent"));
    cfg.stages = 0;
    const auto c = build_scramble(cfg);
    REQUIRE(c.stages.size() == 1);
    CHECK(c.stages[0].steps.empty());
    REQUIRE(c.stages[0].seeded.size() == 2);
    CHECK(c.stages[0].seeded[0].span == Interval(q(1, 10), q(1, 5)));
    CHECK(c.stages[0].seeded[1].span == Interval(q(3, 10), q(2, 5)));
    CHECK(c.points.size() == 2);
    CHECK(verify_certificate(c).pass);
}

TEST_CASE("first stage on the tent map matches the hand computation") {
    // Seeds [1/10, 1/5] and [3/10, 2/5]; f^4 carries them across
    // W0 = [1/16, 3/16] and W1 = [13/16, 15/16]. The leaves below come from a
    // separate fractions-based replay of the four steps (times 4, 7, 10, 14).
    ScrambleConfig cfg(oracle::builtin_map("tent"));
    cfg.stages = 1;
    const auto c = build_scramble(cfg);
    REQUIRE(c.stages.size() == 2);
    const auto& st = c.stages[1];
    CHECK(st.resolution == 4);
    CHECK(st.leaves.size() == 4);
    const auto& sep = st.steps.front();
    CHECK(sep.kind == StepKind::Separation);
    CHECK(sep.time == 4);
    CHECK(sep.targets[0].window == Interval(q(1, 16), q(3, 16)));
    CHECK(sep.targets[1].window == Interval(q(13, 16), q(15, 16)));
    std::vector<unsigned> times;
    for (const auto& s : st.steps) {
        times.push_back(s.time);
    }
    CHECK(times == std::vector<unsigned>{4, 7, 10, 14});
    CHECK(leaf_named(st, "00").span == Interval(q(5725, 49152), q(3817, 32768)));
    CHECK(leaf_named(st, "01").span == Interval(q(8797, 49152), q(5865, 32768)));
    CHECK(leaf_named(st, "10").span == Interval(q(17885, 49152), q(11925, 32768)));
    CHECK(leaf_named(st, "11").span == Interval(q(14813, 49152), q(9877, 32768)));
    const auto r = verify_certificate(c);
    CHECK(r.pass);
    CHECK(r.steps_checked == 4);
}

TEST_CASE("two stages on the tent map") {
    const auto& c = tent_two();
    const auto r = verify_certificate(c);
    CHECK(r.pass);
    CHECK(r.message.empty());
    CHECK_NOTHROW(require_valid(c));
    unsigned last = 0;
    for (const auto& st : c.stages) {
        if (st.index > 0) {
            CHECK(st.leaves.size() == st.index * (std::size_t{1} << (st.index + 1)));
        }
        for (const auto& leaf : st.leaves) {
            CHECK(leaf.span.width() < Rational(1) / pow2(2 * st.index + 1));
        }
        for (const auto& s : st.steps) {
            CHECK(s.time > last);
            last = s.time;
            if (s.kind == StepKind::Density) {
                CHECK(s.time % (st.index == 1 ? 1 : 2) == 0);
            }
        }
    }
    CHECK(c.stages[2].resolution == c.stages[1].steps.back().time + 1);
    CHECK(c.points.size() == 16);

    const auto rep = scramble_report(c);
    CHECK(rep.certified);
    // Every pair is separated at a stage-two step.
    CHECK(rep.separations.size() == 120);
    const Rational n2(static_cast<long>(c.stages[2].resolution));
    const Rational width = Rational(1) / (Rational(2) * n2);
    bool stage_two = false;
    for (const auto& s : rep.separations) {
        CHECK(s.actual >= s.window_gap);
        CHECK(s.window_gap >= s.nominal_bound);
        CHECK(s.nominal_bound > Rational(0));
        CHECK(s.stage == 2);
        stage_two = true;
        CHECK(s.nominal_bound == q(7, 8) - Rational(2) * width);
    }
    CHECK(stage_two);
    REQUIRE_FALSE(rep.proximities.empty());
    CHECK(rep.proximities[0].window_width == q(1, 8));
    for (const auto& p : rep.proximities) {
        CHECK(p.diameter <= p.window_width);
    }
    CHECK(rep.delta == std::vector<Rational>{q(1), q(1), q(1)});
}

TEST_CASE("negative control: any tampered window fails replay at that step") {
    const auto& good = tent_two();
    const auto steps = all_steps(good);
    for (std::size_t i = 0; i < steps.size(); ++i) {
        for (std::size_t t = 0; t < steps[i]->targets.size(); ++t) {
            ScrambleCertificate bad = good;
            Interval& w = step_at(bad, i).targets[t].window;
            w = Interval(w.lo + (w.hi - w.lo) / Rational(1000), w.hi);
            const auto r = verify_certificate(bad);
            CHECK_FALSE(r.pass);
            CHECK(r.failed_step == std::optional<std::size_t>(i));
            try {
                require_valid(bad);
                FAIL("expected ReplayFailure");
            } catch (const ReplayFailure& e) {
                CHECK(e.step() == i);
            }
        }
    }
}

TEST_CASE("negative control: other tampering") {
    const auto& good = tent_two();
    {
        ScrambleCertificate bad = good;
        bad.stages[2].leaves[3].span = Interval(bad.stages[2].leaves[3].span.lo - q(1, 1000000), bad.stages[2].leaves[3].span.hi);
        CHECK_FALSE(verify_certificate(bad).pass);
    }
    {
        ScrambleCertificate bad = good;
        bad.stages[1].steps.pop_back();
        CHECK_FALSE(verify_certificate(bad).pass);
    }
    {
        ScrambleCertificate bad = good;
        step_at(bad, 2).time += 1;
        CHECK(verify_certificate(bad).failed_step == std::optional<std::size_t>(2));
    }
    {
        ScrambleCertificate bad = good;
        bad.points[0].point = bad.points[1].point;
        CHECK_FALSE(verify_certificate(bad).pass);
    }
}

TEST_CASE("certificate documents round-trip") {
    const auto& c = tent_two();
    const Json doc = scramble_document(c);
    CHECK(doc.at("schema") == kSchemaVersion);
    CHECK(doc.at("kind") == "scramble-certificate");
    const auto back = scramble_from(Json::parse(doc.dump()));
    CHECK(back == c);
    CHECK(verify_document(doc).pass);
    Json bad = doc;
    bad["stages"][1]["steps"][0]["targets"][0]["window"][1] = "1/4";
    const auto r = verify_document(bad);
    CHECK_FALSE(r.pass);
    CHECK(r.failed_step == std::optional<std::size_t>(0));
    Json broken = doc;
    broken["stages"][1]["steps"][0]["time"] = "four";
    CHECK_THROWS_AS(verify_document(broken), ValidationError);
}

TEST_CASE("tracking and time progressions") {
    ScrambleConfig cfg(oracle::builtin_map("tent"));
    cfg.stages = 1;
    cfg.tracked.push_back(TrackedPoint{q(2, 5), q(4, 5)});
    const auto c = build_scramble(cfg);
    CHECK(verify_certificate(c).pass);
    int tracking = 0;
    for (const auto* s : all_steps(c)) {
        if (s->kind == StepKind::Tracking) {
            ++tracking;
            REQUIRE(s->anchor.has_value());
            CHECK(s->time % 2 == 1);
            CHECK(s->anchor->window.contains(q(4, 5)));
            if (s->far) {
                CHECK(s->targets[0].window == Interval(q(0), q(1, 16)));
            }
        }
    }
    CHECK(tracking == 2);

    ScrambleConfig nonperiodic = cfg;
    nonperiodic.tracked = {TrackedPoint{q(1, 3), q(2, 3)}};
    CHECK_THROWS_AS(build_scramble(nonperiodic), PreconditionError);
    ScrambleConfig offorbit = cfg;
    offorbit.tracked = {TrackedPoint{q(2, 5), q(2, 3)}};
    CHECK_THROWS_AS(build_scramble(offorbit), PreconditionError);

    ScrambleConfig progression(oracle::builtin_map("tent"));
    progression.stages = 2;
    progression.times = TimeProgression{2, 3};
    const auto p = build_scramble(progression);
    CHECK(verify_certificate(p).pass);
    for (const auto* s : all_steps(p)) {
        CHECK(s->time % 3 == 2);
    }
}

TEST_CASE("preconditions") {
    for (const char* name : {"remark1", "remark4", "example7"}) {
        ScrambleConfig cfg(oracle::builtin_map(name));
        CHECK_THROWS_AS(build_scramble(cfg), PreconditionError);
    }
    ScrambleConfig tight(oracle::builtin_map("tent"));
    tight.stages = 2;
    tight.horizon = 6;
    CHECK_THROWS_AS(build_scramble(tight), CoverageTimeout);
}

TEST_CASE("square path on a map whose fixed point is jumped over") {
    const PLMap hat = oracle::builtin_map("remark4");
    const auto inv = build_invariant_via_square(hat, 2);
    CHECK(inv.fixed_point == q(1, 2));
    CHECK(inv.half == Interval(q(0), q(1, 2)));
    CHECK(inv.pass);
    CHECK(inv.invariant);
    CHECK(inv.straddles);
    CHECK(inv.separated);
    CHECK(inv.separation_bound >= q(1, 2) - inv.window_slack);
    CHECK(inv.separation_bound > Rational(0));
    for (const auto& x : inv.family) {
        CHECK(std::binary_search(inv.family.begin(), inv.family.end(), oracle::eval_scan(hat, x)));
    }
    for (const auto& x : inv.base_family) {
        CHECK(x <= q(1, 2));
    }
    CHECK(verify_invariant(hat, inv).pass);
    const Json doc = invariant_document(hat, inv);
    CHECK(verify_document(Json::parse(doc.dump())).pass);

    InvariantScramble bad = inv;
    bad.family.pop_back();
    CHECK_FALSE(verify_invariant(hat, bad).pass);
    InvariantScramble badrep = inv;
    badrep.representatives[0].second += 1;
    CHECK_FALSE(verify_invariant(hat, badrep).pass);
    CHECK_THROWS_AS(build_invariant_via_square(oracle::builtin_map("tent"), 1), PreconditionError);
}

TEST_CASE("property: builds replay on every mixing map tried") {
    int built = 0;
    for (const char* name : {"tent", "remark1", "remark2:2", "remark2:3", "remark2:4", "remark4", "example7"}) {
        for (unsigned l = 0; l <= 2; ++l) {
            ScrambleConfig cfg(oracle::builtin_map(name));
            cfg.stages = l;
            try {
                const auto c = build_scramble(cfg);
                ++built;
                CHECK(verify_certificate(c).pass);
            } catch (const PreconditionError&) {
            }
        }
    }
    CHECK(built >= 3);
    std::mt19937_64 rng(71);
    int random_built = 0;
    for (int trial = 0; trial < 40 && random_built < 12; ++trial) {
        ScrambleConfig cfg(oracle::random_integer_markov(rng, 2 + trial % 3));
        cfg.stages = 1 + trial % 2;
        try {
            const auto c = build_scramble(cfg);
            ++random_built;
            CHECK(verify_certificate(c).pass);
            CHECK(scramble_report(c).certified);
        } catch (const PreconditionError&) {
        }
    }
    CHECK(random_built >= 5);
}

TEST_CASE("property: lazy component search agrees with the composed preimage") {
    std::mt19937_64 rng(72);
    int found = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const PLMap f = trial % 3 == 0 ? oracle::builtin_map("tent") : oracle::random_selfmap(rng, 2 + trial % 4);
        const Interval k = oracle::random_subinterval(rng, f.domain());
        const Interval w = oracle::random_subinterval(rng, f.domain());
        if (k.is_point() || w.is_point()) {
            continue;
        }
        const unsigned t = 1 + static_cast<unsigned>(trial % 4);
        PLMap g = restrict_to(identity_map(f.domain()), k);
        for (unsigned i = 0; i < t; ++i) {
            g = compose(f, g);
        }
        std::optional<Interval> expect;
        for (const auto& c : preimage(g, w)) {
            if (!c.is_point()) {
                expect = c;
                break;
            }
        }
        if (expect) {
            ++found;
            CHECK(leftmost_preimage_component(f, k, t, w) == *expect);
        } else {
            CHECK_THROWS_AS(leftmost_preimage_component(f, k, t, w), Error);
        }
    }
    CHECK(found > 100);
}

}
