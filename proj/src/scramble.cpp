#include "plcert/scramble.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "plcert/chaos.hpp"
#include "plcert/errors.hpp"
#include "plcert/markov.hpp"

namespace plcert {

bool TimeProgression::contains(unsigned k) const {
    return k >= start && (step == 0 ? k == start : (k - start) % step == 0);
}

std::string LeafId::str() const { return "K" + std::to_string(seed) + ":" + word; }

const char* step_kind_name(StepKind k) {
    switch (k) {
    case StepKind::Separation:
        return "SEPARATION";
    case StepKind::SeedSeparation:
        return "SEED_SEPARATION";
    case StepKind::Proximality:
        return "PROXIMALITY";
    case StepKind::Density:
        return "DENSITY";
    case StepKind::Tracking:
        return "TRACKING";
    }
    return "?";
}

std::optional<StepKind> parse_step_kind(const std::string& s) {
    for (auto k : {StepKind::Separation, StepKind::SeedSeparation, StepKind::Proximality, StepKind::Density,
                   StepKind::Tracking}) {
        if (s == step_kind_name(k)) {
            return k;
        }
    }
    return std::nullopt;
}

namespace {

constexpr unsigned kMaxStages = 8;

Interval image_power(const PLMap& f, Interval k, unsigned n) {
    for (unsigned i = 0; i < n; ++i) {
        k = image(f, k);
    }
    return k;
}

Rational eval_power(const PLMap& f, Rational x, unsigned n) {
    for (unsigned i = 0; i < n; ++i) {
        x = eval(f, x);
    }
    return x;
}

unsigned long long factorial(unsigned n) {
    unsigned long long r = 1;
    for (unsigned i = 2; i <= n; ++i) {
        r *= i;
    }
    return r;
}

Rational gap_between(const Interval& a, const Interval& b) {
    if (a.hi < b.lo) {
        return b.lo - a.hi;
    }
    if (b.hi < a.lo) {
        return a.lo - b.hi;
    }
    return Rational(0);
}

std::string binary_word(std::size_t value, unsigned length) {
    std::string w(length, '0');
    for (unsigned i = 0; i < length; ++i) {
        if ((value >> (length - 1 - i)) & 1U) {
            w[i] = '1';
        }
    }
    return w;
}

/// f^t restricted to k, composed one step at a time.
PLMap restricted_power(const PLMap& f, const Interval& k, unsigned t, const PieceBudget& budget) {
    PLMap g = restrict_to(identity_map(f.domain()), k);
    for (unsigned i = 0; i < t; ++i) {
        g = compose(f, g, budget);
    }
    return g;
}

/// Leftmost component with nonempty interior of {x in k : f^t(x) in w}.
/// Walks the affine branches of f^t on k from left to right, pruning any
/// branch whose interval image misses w.
class ComponentSearch {
public:
    ComponentSearch(const PLMap& f, unsigned t, const Interval& w) : f_(f), t_(t), w_(w) {}

    Interval run(const Interval& k) {
        visit(0, k, k.lo, k.hi);
        if (!start_) {
            throw Error("no preimage component of " + w_.str() + " inside " + k.str());
        }
        return Interval(*start_, end_);
    }

private:
    enum class State { Seeking, Extending, Done };

    static Interval span_of(const Rational& a, const Rational& b) { return Interval(min(a, b), max(a, b)); }

    void visit(unsigned depth, const Interval& x, const Rational& y0, const Rational& y1) {
        if (state_ == State::Done) {
            return;
        }
        if (!image_power(f_, span_of(y0, y1), t_ - depth).intersects(w_)) {
            if (state_ == State::Extending) {
                state_ = State::Done;
            }
            return;
        }
        if (depth == t_) {
            leaf(x, y0, y1);
            return;
        }
        if (y0 == y1) {
            const Rational v = eval(f_, y0);
            visit(depth + 1, x, v, v);
            return;
        }
        const bool rising = y0 < y1;
        const Interval ys = span_of(y0, y1);
        const std::size_t first = f_.piece_index(ys.lo);
        const std::size_t last = f_.piece_index(ys.hi);
        std::vector<std::tuple<Interval, Rational, Rational>> parts;
        for (std::size_t i = first; i <= last; ++i) {
            const Piece p = f_.piece(i);
            const Rational lo = max(ys.lo, p.x0);
            const Rational hi = min(ys.hi, p.x1);
            if (!(lo < hi)) {
                continue;
            }
            const Rational ya = rising ? lo : hi;
            const Rational yb = rising ? hi : lo;
            const Rational xa = x.lo + (ya - y0) * x.width() / (y1 - y0);
            const Rational xb = x.lo + (yb - y0) * x.width() / (y1 - y0);
            parts.emplace_back(Interval(xa, xb), p.at(ya), p.at(yb));
        }
        if (!rising) {
            std::reverse(parts.begin(), parts.end());
        }
        for (const auto& [xs, a, b] : parts) {
            visit(depth + 1, xs, a, b);
            if (state_ == State::Done) {
                return;
            }
        }
    }

    void leaf(const Interval& x, const Rational& y0, const Rational& y1) {
        // Affine on x; solve y in w.
        Rational lo = x.lo, hi = x.hi;
        if (y0 != y1) {
            const Rational a = x.lo + (w_.lo - y0) * x.width() / (y1 - y0);
            const Rational b = x.lo + (w_.hi - y0) * x.width() / (y1 - y0);
            lo = max(x.lo, min(a, b));
            hi = min(x.hi, max(a, b));
        } else if (!w_.contains(y0)) {
            lo = x.hi;
            hi = x.lo;
        }
        if (state_ == State::Seeking) {
            if (lo < hi) {
                start_ = lo;
                end_ = hi;
                state_ = hi == x.hi ? State::Extending : State::Done;
            }
            return;
        }
        if (lo == x.lo && lo <= hi) {
            end_ = hi;
            state_ = hi == x.hi ? State::Extending : State::Done;
        } else {
            state_ = State::Done;
        }
    }

    const PLMap& f_;
    unsigned t_;
    Interval w_;
    State state_ = State::Seeking;
    std::optional<Rational> start_;
    Rational end_;
};

std::vector<Rational> proximality_points(const ScrambleConfig& cfg) {
    if (!cfg.proximality_points.empty()) {
        return cfg.proximality_points;
    }
    std::vector<Rational> out;
    for (const auto& z : isolated_fixed_points(cfg.f)) {
        if (cfg.f.domain().contains_in_interior(z)) {
            out.push_back(z);
        }
    }
    if (out.empty()) {
        throw PreconditionError("no interior fixed point to use as a proximality target");
    }
    return out;
}

/// Orbit of a tracked point, starting at the point itself.
std::vector<Rational> tracked_orbit(const ScrambleConfig& cfg, const TrackedPoint& tp) {
    const PLMap& f = cfg.f;
    if (!f.domain().contains(tp.point) || !f.domain().contains(tp.proxy)) {
        throw PreconditionError("tracked point outside the domain");
    }
    std::vector<Rational> orbit{tp.point};
    Rational x = tp.point;
    for (unsigned i = 0; i < cfg.horizon; ++i) {
        x = eval(f, x);
        if (x == tp.point) {
            if (std::find(orbit.begin(), orbit.end(), tp.proxy) == orbit.end()) {
                throw PreconditionError("proxy " + tp.proxy.short_str() + " is not on the orbit of " +
                                        tp.point.short_str());
            }
            return orbit;
        }
        orbit.push_back(x);
    }
    throw PreconditionError("tracked point " + tp.point.short_str() + " is not periodic within the horizon");
}

Rational far_endpoint(const Interval& dom, const Rational& y) {
    return (y - dom.lo >= dom.hi - y) ? dom.lo : dom.hi;
}

struct PlanItem {
    StepKind kind;
    unsigned index;
    unsigned shift;
    bool far;
};

std::vector<PlanItem> stage_plan(const ScrambleConfig& cfg, unsigned l) {
    std::vector<PlanItem> plan;
    for (unsigned s = 0; s <= l; ++s) {
        plan.push_back({StepKind::Separation, s, s, false});
    }
    for (unsigned r = 1; r + 1 <= l; ++r) {
        plan.push_back({StepKind::SeedSeparation, r, 0, false});
    }
    for (unsigned m = 1; m <= l; ++m) {
        plan.push_back({StepKind::Proximality, m, 0, false});
    }
    plan.push_back({StepKind::Density, l, 0, false});
    const unsigned tracked = std::min<unsigned>(l, static_cast<unsigned>(cfg.tracked.size()));
    for (unsigned m = 1; m <= tracked; ++m) {
        plan.push_back({StepKind::Tracking, m, 0, false});
        plan.push_back({StepKind::Tracking, m, 0, true});
    }
    return plan;
}

std::vector<StepTarget> expected_targets(const ScrambleConfig& cfg, const ScrambleStage& st,
                                         const std::vector<LeafId>& ids, const PlanItem& item) {
    const Interval dom = cfg.f.domain();
    const unsigned n = st.resolution;
    const unsigned l = st.index;
    auto split = [&](auto&& goes_low) {
        StepTarget low{{}, scramble_window(dom, st.sep_low, n)};
        StepTarget high{{}, scramble_window(dom, st.sep_high, n)};
        for (const auto& id : ids) {
            (goes_low(id) ? low : high).leaves.push_back(id);
        }
        return std::vector<StepTarget>{low, high};
    };
    switch (item.kind) {
    case StepKind::Separation:
        return split([&](const LeafId& id) { return id.word.at(l - item.shift) == '0'; });
    case StepKind::SeedSeparation:
        return split([&](const LeafId& id) { return id.seed <= item.index; });
    case StepKind::Proximality: {
        const auto pts = proximality_points(cfg);
        return {StepTarget{ids, scramble_window(dom, pts[(item.index - 1) % pts.size()], n)}};
    }
    case StepKind::Density:
        return {StepTarget{ids, base_open(cfg, l)}};
    case StepKind::Tracking: {
        const Rational y = cfg.tracked.at(item.index - 1).proxy;
        return {StepTarget{ids, scramble_window(dom, item.far ? far_endpoint(dom, y) : y, n)}};
    }
    }
    return {};
}

std::optional<Anchor> expected_anchor(const ScrambleConfig& cfg, const ScrambleStage& st, const PlanItem& item) {
    if (item.kind != StepKind::Tracking) {
        return std::nullopt;
    }
    const auto& tp = cfg.tracked.at(item.index - 1);
    return Anchor{tp.point, scramble_window(cfg.f.domain(), tp.proxy, st.resolution)};
}

bool time_admissible(const ScrambleConfig& cfg, const PlanItem& item, unsigned stage, unsigned k) {
    if (!cfg.times.contains(k)) {
        return false;
    }
    if (item.kind == StepKind::Density && cfg.divisibility) {
        return k % factorial(stage) == 0;
    }
    return true;
}

void check_mixing(const ScrambleConfig& cfg) {
    const auto dm = detect_markov(cfg.f, 256);
    const auto* p = std::get_if<MarkovPartition>(&dm);
    if (p == nullptr) {
        throw PreconditionError("no Markov partition found; mixing cannot be certified");
    }
    const auto g = graph_certificate(*p, p->size() * p->size() + 1);
    if (!g.mixing_certified) {
        throw PreconditionError("Markov graph is not primitive with expansive branches; mixing not certified");
    }
}

std::vector<Leaf> seed_leaves(const Interval& u, const std::vector<Leaf>& existing, unsigned seed, unsigned length) {
    std::vector<Interval> blocked;
    for (const auto& l : existing) {
        if (l.span.intersects(u)) {
            blocked.push_back(l.span);
        }
    }
    std::sort(blocked.begin(), blocked.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::optional<Interval> best;
    Rational cursor = u.lo;
    auto offer = [&](const Rational& lo, const Rational& hi) {
        if (lo < hi && (!best || hi - lo > best->width())) {
            best = Interval(lo, hi);
        }
    };
    for (const auto& b : blocked) {
        offer(cursor, min(b.lo, u.hi));
        cursor = max(cursor, b.hi);
    }
    offer(cursor, u.hi);
    if (!best) {
        throw DisjointnessFailure("no room for seed " + std::to_string(seed) + " inside " + u.str());
    }
    const std::size_t count = std::size_t{1} << length;
    const Rational slot = best->width() / Rational(static_cast<long>(2 * count + 1));
    std::vector<Leaf> out;
    for (std::size_t i = 0; i < count; ++i) {
        const Rational lo = best->lo + slot * Rational(static_cast<long>(2 * i + 1));
        out.push_back(Leaf{LeafId{seed, binary_word(i, length)}, Interval(lo, lo + slot)});
    }
    return out;
}

std::vector<LeafId> ids_of(const std::vector<Leaf>& leaves) {
    std::vector<LeafId> out;
    for (const auto& l : leaves) {
        out.push_back(l.id);
    }
    return out;
}

class Builder {
public:
    explicit Builder(const ScrambleConfig& cfg) : cfg_(cfg), f_(cfg.f) {}

    ScrambleCertificate run() {
        ScrambleCertificate cert{cfg_, {}, {}};
        ScrambleStage zero;
        zero.seeded = seed_leaves(base_open(cfg_, 1), {}, 1, 1);
        cert.stages.push_back(zero);
        std::vector<Leaf> current = zero.seeded;
        for (unsigned l = 1; l <= cfg_.stages; ++l) {
            ScrambleStage st;
            st.index = l;
            st.resolution = l == 1 ? cfg_.first_resolution : last_ + 1;
            std::tie(st.sep_low, st.sep_high) = separation_targets(cfg_, l);
            for (const auto& item : stage_plan(cfg_, l)) {
                if (item.kind == StepKind::Separation && item.shift == 0) {
                    current = split(st, current, item);
                } else {
                    apply(st, current, item);
                }
            }
            const Rational bound = Rational(1) / pow2(2 * l + 1);
            for (auto& leaf : current) {
                if (leaf.span.width() >= bound) {
                    leaf.span = Interval(leaf.span.lo, leaf.span.lo + bound / Rational(2));
                }
            }
            st.leaves = current;
            if (l < cfg_.stages) {
                st.seeded = seed_leaves(base_open(cfg_, l + 1), current, l + 1, l + 1);
                current.insert(current.end(), st.seeded.begin(), st.seeded.end());
            }
            cert.stages.push_back(std::move(st));
        }
        const auto& fin = cfg_.stages == 0 ? cert.stages.back().seeded : cert.stages.back().leaves;
        for (const auto& leaf : fin) {
            cert.points.push_back(ExtractedPoint{leaf.id, leaf.span.midpoint(), omega_code(leaf.id.word)});
        }
        return cert;
    }

private:
    unsigned find_time(const std::vector<Interval>& spans, const std::vector<Interval>& covers, const PlanItem& item,
                       unsigned stage, const std::function<bool(unsigned)>& extra) {
        std::vector<Interval> imgs;
        for (const auto& s : spans) {
            imgs.push_back(image_power(f_, s, last_ + 1 + item.shift));
        }
        for (unsigned k = last_ + 1; k <= cfg_.horizon; ++k) {
            if (time_admissible(cfg_, item, stage, k) && extra(k)) {
                bool ok = true;
                for (std::size_t i = 0; i < imgs.size() && ok; ++i) {
                    ok = imgs[i].contains(covers[i]);
                }
                if (ok) {
                    return k;
                }
            }
            for (auto& im : imgs) {
                im = image(f_, im);
            }
        }
        throw CoverageTimeout(std::string("no ") + step_kind_name(item.kind) + " time at stage " +
                              std::to_string(stage) + " within horizon " + std::to_string(cfg_.horizon));
    }

    std::vector<Leaf> split(ScrambleStage& st, const std::vector<Leaf>& parents, const PlanItem& item) {
        const Interval dom = f_.domain();
        const Interval w0 = scramble_window(dom, st.sep_low, st.resolution);
        const Interval w1 = scramble_window(dom, st.sep_high, st.resolution);
        std::vector<Interval> spans, covers;
        for (const auto& p : parents) {
            spans.push_back(p.span);
            covers.push_back(hull(w0, w1));
        }
        const unsigned k = find_time(spans, covers, item, st.index, [](unsigned) { return true; });
        std::vector<Leaf> children;
        for (const auto& p : parents) {
            children.push_back(Leaf{LeafId{p.id.seed, p.id.word + "0"}, leftmost_preimage_component(f_, p.span, k, w0)});
            children.push_back(Leaf{LeafId{p.id.seed, p.id.word + "1"}, leftmost_preimage_component(f_, p.span, k, w1)});
        }
        record(st, children, item, k);
        return children;
    }

    void apply(ScrambleStage& st, std::vector<Leaf>& leaves, const PlanItem& item) {
        const auto targets = expected_targets(cfg_, st, ids_of(leaves), item);
        std::map<LeafId, Interval> window_of;
        for (const auto& t : targets) {
            for (const auto& id : t.leaves) {
                window_of.emplace(id, t.window);
            }
        }
        std::vector<Interval> spans, covers;
        for (const auto& leaf : leaves) {
            spans.push_back(leaf.span);
            covers.push_back(window_of.at(leaf.id));
        }
        std::function<bool(unsigned)> extra = [](unsigned) { return true; };
        if (const auto anchor = expected_anchor(cfg_, st, item)) {
            const auto orbit = tracked_orbit(cfg_, cfg_.tracked.at(item.index - 1));
            extra = [orbit, w = anchor->window](unsigned k) { return w.contains(orbit[k % orbit.size()]); };
        }
        const unsigned k = find_time(spans, covers, item, st.index, extra);
        for (auto& leaf : leaves) {
            leaf.span = leftmost_preimage_component(f_, leaf.span, k + item.shift, window_of.at(leaf.id));
        }
        record(st, leaves, item, k);
    }

    void record(ScrambleStage& st, const std::vector<Leaf>& leaves, const PlanItem& item, unsigned k) {
        ScrambleStep step;
        step.kind = item.kind;
        step.stage = st.index;
        step.index = item.index;
        step.time = k;
        step.shift = item.shift;
        step.far = item.far;
        step.targets = expected_targets(cfg_, st, ids_of(leaves), item);
        step.anchor = expected_anchor(cfg_, st, item);
        st.steps.push_back(std::move(step));
        last_ = k;
    }

    const ScrambleConfig& cfg_;
    const PLMap& f_;
    unsigned last_ = 0;
};

void validate_config(const ScrambleConfig& cfg) {
    if (!cfg.f.is_self_map()) {
        throw PreconditionError("scramble construction needs a self-map");
    }
    if (cfg.stages > kMaxStages) {
        throw PreconditionError("at most " + std::to_string(kMaxStages) + " stages are supported");
    }
    if (cfg.first_resolution == 0 || cfg.times.start == 0) {
        throw PreconditionError("resolutions and times must be positive");
    }
    for (unsigned l = 1; l <= cfg.stages; ++l) {
        const auto [a, b] = separation_targets(cfg, l);
        if (!cfg.f.domain().contains(a) || !cfg.f.domain().contains(b) || !(a < b)) {
            throw PreconditionError("separation targets for stage " + std::to_string(l) + " must satisfy a < b in the domain");
        }
    }
    for (unsigned j = 1; j <= std::max(1U, cfg.stages); ++j) {
        const Interval u = base_open(cfg, j);
        if (!cfg.f.domain().contains(u) || u.is_point()) {
            throw PreconditionError("base open U_" + std::to_string(j) + " must be a nondegenerate subinterval");
        }
    }
    for (const auto& tp : cfg.tracked) {
        tracked_orbit(cfg, tp);
    }
    if (cfg.stages > 0) {
        proximality_points(cfg);
    }
}

class Replay {
public:
    explicit Replay(const ScrambleCertificate& cert) : cert_(cert), cfg_(cert.config), f_(cert.config.f) {}

    std::size_t run() {
        if (!f_.is_self_map()) {
            fail("map is not a self-map");
        }
        if (cert_.stages.size() != cfg_.stages + 1) {
            fail("expected " + std::to_string(cfg_.stages + 1) + " stages");
        }
        const auto& zero = cert_.stages[0];
        if (zero.index != 0 || !zero.leaves.empty() || !zero.steps.empty()) {
            fail("stage 0 must hold only the first seed");
        }
        check_seeded(zero, {}, 1);
        unsigned last = 0;
        for (unsigned l = 1; l <= cfg_.stages; ++l) {
            check_stage(cert_.stages[l], cert_.stages[l - 1], last);
        }
        check_points();
        return checked_;
    }

private:
    [[noreturn]] void fail(const std::string& what, std::size_t step = ReplayFailure::npos) const {
        throw ReplayFailure(step, what);
    }

    void check_seeded(const ScrambleStage& st, const std::vector<Leaf>& stage_leaves, unsigned seed) {
        const unsigned length = st.index + 1;
        const bool expect = st.index == 0 || st.index < cfg_.stages;
        if (!expect) {
            if (!st.seeded.empty()) {
                fail("last stage must not seed");
            }
            return;
        }
        const std::size_t count = std::size_t{1} << length;
        if (st.seeded.size() != count) {
            fail("stage " + std::to_string(st.index) + " must seed " + std::to_string(count) + " leaves");
        }
        const Interval u = base_open(cfg_, seed);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& leaf = st.seeded[i];
            if (leaf.id != LeafId{seed, binary_word(i, length)}) {
                fail("unexpected seeded leaf " + leaf.id.str());
            }
            if (leaf.span.is_point() || !u.contains(leaf.span)) {
                fail("seeded leaf " + leaf.id.str() + " is not a nondegenerate subinterval of " + u.str());
            }
        }
        std::vector<Leaf> all = stage_leaves;
        all.insert(all.end(), st.seeded.begin(), st.seeded.end());
        check_disjoint(all);
    }

    void check_disjoint(std::vector<Leaf> leaves) const {
        std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) { return a.span.lo < b.span.lo; });
        for (std::size_t i = 1; i < leaves.size(); ++i) {
            if (!(leaves[i - 1].span.hi < leaves[i].span.lo)) {
                fail("leaves " + leaves[i - 1].id.str() + " and " + leaves[i].id.str() + " intersect");
            }
        }
    }

    void check_stage(const ScrambleStage& st, const ScrambleStage& prev, unsigned& last) {
        const unsigned l = st.index;
        const unsigned expect_res = l == 1 ? cfg_.first_resolution : last + 1;
        if (st.resolution != expect_res) {
            fail("stage " + std::to_string(l) + " resolution should be " + std::to_string(expect_res));
        }
        if (std::make_pair(st.sep_low, st.sep_high) != separation_targets(cfg_, l)) {
            fail("stage " + std::to_string(l) + " separation targets differ from the configuration");
        }
        std::vector<LeafId> want;
        for (unsigned j = 1; j <= l; ++j) {
            for (std::size_t i = 0; i < (std::size_t{1} << (l + 1)); ++i) {
                want.push_back(LeafId{j, binary_word(i, l + 1)});
            }
        }
        if (ids_of(st.leaves) != want) {
            fail("stage " + std::to_string(l) + " leaf labels are not seeds 1.." + std::to_string(l) +
                 " with all words of length " + std::to_string(l + 1));
        }
        std::map<LeafId, Interval> parents;
        for (const auto* group : {&prev.leaves, &prev.seeded}) {
            for (const auto& leaf : *group) {
                parents.emplace(leaf.id, leaf.span);
            }
        }
        const Rational bound = Rational(1) / pow2(2 * l + 1);
        std::map<LeafId, Interval> span_of;
        for (const auto& leaf : st.leaves) {
            if (leaf.span.is_point()) {
                fail("leaf " + leaf.id.str() + " has empty interior");
            }
            if (!(leaf.span.width() < bound)) {
                fail("leaf " + leaf.id.str() + " is wider than 1/2^" + std::to_string(2 * l + 1));
            }
            const LeafId parent{leaf.id.seed, leaf.id.word.substr(0, l)};
            const auto it = parents.find(parent);
            if (it == parents.end() || !it->second.contains(leaf.span)) {
                fail("leaf " + leaf.id.str() + " does not nest in " + parent.str());
            }
            span_of.emplace(leaf.id, leaf.span);
        }
        check_disjoint(st.leaves);
        const auto plan = stage_plan(cfg_, l);
        if (st.steps.size() != plan.size()) {
            fail("stage " + std::to_string(l) + " should record " + std::to_string(plan.size()) + " steps");
        }
        for (std::size_t i = 0; i < plan.size(); ++i) {
            check_step(st, st.steps[i], plan[i], span_of, last);
            last = st.steps[i].time;
            ++checked_;
        }
        check_seeded(st, st.leaves, l + 1);
    }

    void check_step(const ScrambleStage& st, const ScrambleStep& step, const PlanItem& item,
                    const std::map<LeafId, Interval>& span_of, unsigned last) {
        const std::size_t at = checked_;
        const std::string where = std::string(step_kind_name(item.kind)) + " step " + std::to_string(at);
        if (step.kind != item.kind || step.index != item.index || step.shift != item.shift || step.far != item.far ||
            step.stage != st.index) {
            fail(where + ": kind or index out of schedule", at);
        }
        if (step.time <= last) {
            fail(where + ": time " + std::to_string(step.time) + " does not increase", at);
        }
        if (!time_admissible(cfg_, item, st.index, step.time)) {
            fail(where + ": time " + std::to_string(step.time) + " is not admissible", at);
        }
        if (step.targets != expected_targets(cfg_, st, ids_of(st.leaves), item)) {
            fail(where + ": targets or windows differ from the window rule", at);
        }
        if (step.anchor != expected_anchor(cfg_, st, item)) {
            fail(where + ": anchor differs from the tracked point", at);
        }
        for (const auto& t : step.targets) {
            if (!(t.window.width() < Rational(1, static_cast<long>(st.resolution))) && item.kind != StepKind::Density) {
                fail(where + ": window " + t.window.str() + " is not shorter than 1/n", at);
            }
            for (const auto& id : t.leaves) {
                const Interval img = image_power(f_, image_power(f_, span_of.at(id), step.shift), step.time);
                if (!t.window.contains(img)) {
                    fail(where + ": image " + img.str() + " of " + id.str() + " leaves " + t.window.str(), at);
                }
            }
        }
        if (step.anchor) {
            const Rational y = eval_power(f_, step.anchor->point, step.time);
            if (!step.anchor->window.contains(y)) {
                fail(where + ": tracked point lands at " + y.short_str() + " outside " + step.anchor->window.str(), at);
            }
        }
    }

    void check_points() const {
        const auto& fin = cfg_.stages == 0 ? cert_.stages.back().seeded : cert_.stages.back().leaves;
        if (cert_.points.size() != fin.size()) {
            fail("one extracted point per final leaf expected");
        }
        for (std::size_t i = 0; i < fin.size(); ++i) {
            const auto& p = cert_.points[i];
            if (p.leaf != fin[i].id || !fin[i].span.contains(p.point) || p.code != omega_code(p.leaf.word)) {
                fail("extracted point " + std::to_string(i) + " does not match its leaf");
            }
        }
    }

    const ScrambleCertificate& cert_;
    const ScrambleConfig& cfg_;
    const PLMap& f_;
    std::size_t checked_ = 0;
};

}  // namespace

Interval leftmost_preimage_component(const PLMap& f, const Interval& k, unsigned t, const Interval& w) {
    if (!f.domain().contains(k) || k.is_point() || w.is_point()) {
        throw DomainError("component search needs nondegenerate intervals inside the domain");
    }
    return ComponentSearch(f, t, w).run(k);
}

Interval scramble_window(const Interval& domain, const Rational& p, unsigned n) {
    const Rational r = Rational(1) / Rational(4 * static_cast<long>(n));
    return Interval(max(domain.lo, p - r), min(domain.hi, p + r));
}

Interval base_open(const ScrambleConfig& cfg, unsigned j) {
    if (j == 0) {
        throw PreconditionError("base opens are numbered from 1");
    }
    if (!cfg.base_opens.empty()) {
        return cfg.base_opens.at((j - 1) % cfg.base_opens.size());
    }
    const Interval d = cfg.f.domain();
    unsigned level = 1;
    unsigned index = j - 1;
    while (index >= (1U << level)) {
        index -= 1U << level;
        ++level;
    }
    const Rational w = d.width() / pow2(level);
    return Interval(d.lo + w * Rational(static_cast<long>(index)), d.lo + w * Rational(static_cast<long>(index + 1)));
}

std::pair<Rational, Rational> separation_targets(const ScrambleConfig& cfg, unsigned stage) {
    if (!cfg.separation_targets.empty()) {
        return cfg.separation_targets.at((stage - 1) % cfg.separation_targets.size());
    }
    const Interval d = cfg.f.domain();
    const Rational inset = d.width() / pow2(stage + 2);
    return {d.lo + inset, d.hi - inset};
}

std::string omega_code(const std::string& word) {
    std::string out;
    for (std::size_t i = 1; i <= word.size(); ++i) {
        out += word.substr(0, i);
    }
    return out;
}

ScrambleCertificate build_scramble(const ScrambleConfig& cfg) {
    validate_config(cfg);
    if (cfg.require_mixing) {
        check_mixing(cfg);
    }
    return Builder(cfg).run();
}

ReplayReport verify_certificate(const ScrambleCertificate& cert) {
    ReplayReport r;
    try {
        r.steps_checked = Replay(cert).run();
        r.pass = true;
    } catch (const ReplayFailure& e) {
        if (e.step() != ReplayFailure::npos) {
            r.failed_step = e.step();
        }
        r.message = e.what();
    } catch (const Error& e) {
        r.message = e.what();
    }
    return r;
}

void require_valid(const ScrambleCertificate& cert) {
    try {
        Replay(cert).run();
    } catch (const ReplayFailure&) {
        throw;
    } catch (const Error& e) {
        throw ReplayFailure(ReplayFailure::npos, e.what());
    }
}

ScrambleReport scramble_report(const ScrambleCertificate& cert, unsigned delta_terms) {
    ScrambleReport rep;
    const PLMap& f = cert.config.f;
    std::vector<const ScrambleStep*> steps;
    for (const auto& st : cert.stages) {
        for (const auto& s : st.steps) {
            steps.push_back(&s);
        }
    }
    auto find_step = [&](StepKind kind, unsigned stage, unsigned index) -> std::size_t {
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (steps[i]->kind == kind && steps[i]->stage == stage && steps[i]->index == index) {
                return i;
            }
        }
        return steps.size();
    };
    // A final leaf answers to the step target holding its ancestor.
    auto window_for = [](const ScrambleStep& s, const LeafId& id) -> const Interval* {
        for (const auto& t : s.targets) {
            for (const auto& anc : t.leaves) {
                if (anc.seed == id.seed && id.word.compare(0, anc.word.size(), anc.word) == 0) {
                    return &t.window;
                }
            }
        }
        return nullptr;
    };
    bool sound = true;
    const auto& pts = cert.points;
    const unsigned last_stage = cert.stages.back().index;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const LeafId& a = pts[i].leaf;
            const LeafId& b = pts[j].leaf;
            std::size_t at = steps.size();
            if (a.seed == b.seed) {
                const auto diff = std::mismatch(a.word.begin(), a.word.end(), b.word.begin()).first - a.word.begin();
                if (diff < static_cast<long>(a.word.size())) {
                    at = find_step(StepKind::Separation, last_stage, last_stage - static_cast<unsigned>(diff));
                }
            } else {
                at = find_step(StepKind::SeedSeparation, last_stage, std::min(a.seed, b.seed));
            }
            if (at == steps.size()) {
                continue;
            }
            const ScrambleStep& s = *steps[at];
            const Interval* wa = window_for(s, a);
            const Interval* wb = window_for(s, b);
            if (wa == nullptr || wb == nullptr) {
                sound = false;
                continue;
            }
            const auto& st = cert.stages.at(s.stage);
            SeparationClaim c;
            c.first = i;
            c.second = j;
            c.step = at;
            c.stage = s.stage;
            c.time = s.time;
            c.window_gap = gap_between(*wa, *wb);
            c.nominal_bound = (st.sep_high - st.sep_low).abs() - wa->width() - wb->width();
            const unsigned t = s.time + s.shift;
            c.actual = (eval_power(f, pts[i].point, t) - eval_power(f, pts[j].point, t)).abs();
            sound = sound && c.actual >= c.window_gap && c.window_gap >= c.nominal_bound && c.nominal_bound > Rational(0);
            rep.separations.push_back(c);
        }
    }
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const ScrambleStep& s = *steps[i];
        if (s.kind != StepKind::Proximality || s.targets.size() != 1) {
            continue;
        }
        ProximityClaim c;
        c.step = i;
        c.time = s.time;
        c.window_width = s.targets[0].window.width();
        std::optional<Rational> lo, hi;
        for (const auto& p : pts) {
            if (window_for(s, p.leaf) == nullptr) {
                continue;
            }
            const Rational y = eval_power(f, p.point, s.time);
            lo = lo ? min(*lo, y) : y;
            hi = hi ? max(*hi, y) : y;
        }
        c.diameter = lo ? *hi - *lo : Rational(0);
        sound = sound && c.diameter <= c.window_width;
        rep.proximities.push_back(c);
    }
    for (unsigned n = 1; n <= delta_terms; ++n) {
        rep.delta.push_back(sup_displacement(f, n, cert.config.budget));
    }
    rep.certified = sound && !rep.separations.empty() && !rep.proximities.empty();
    return rep;
}

namespace {

/// Everything downstream of the representatives.
void assemble(const PLMap& f, InvariantScramble& out) {
    const PLMap& g = out.base.config.f;
    const Rational z = out.fixed_point;
    std::set<Rational> base;
    for (const auto& [x, p] : out.representatives) {
        Rational y = x;
        for (unsigned i = 0; i < p; ++i) {
            base.insert(y);
            y = eval(g, y);
        }
    }
    out.base_family.assign(base.begin(), base.end());
    std::set<Rational> fam = base;
    for (const auto& x : base) {
        fam.insert(eval(f, x));
    }
    out.family.assign(fam.begin(), fam.end());
    out.invariant = std::all_of(fam.begin(), fam.end(), [&](const Rational& x) { return fam.count(eval(f, x)) == 1; });

    for (const auto& st : out.base.stages) {
        for (const auto& s : st.steps) {
            out.straddle_times.push_back(2 * s.time + 1);
        }
    }
    // At each odd time t, f^t(x) sits right of z and f^t(f(x)) left of it.
    out.straddles = true;
    const unsigned horizon = out.straddle_times.empty() ? 0 : out.straddle_times.back() + 1;
    for (const auto& x0 : out.base_family) {
        Rational x = x0;
        auto next = out.straddle_times.begin();
        for (unsigned t = 1; t <= horizon && next != out.straddle_times.end(); ++t) {
            x = eval(f, x);
            if (t == *next && x < z) {
                out.straddles = false;
            }
            if (t == *next + 1) {
                if (x > z) {
                    out.straddles = false;
                }
                ++next;
            }
        }
    }

    const auto& last = out.base.stages.back();
    const ScrambleStep& sep = last.steps.front();
    const Interval w0 = sep.targets.front().window;
    out.separation_time = 2 * sep.time;
    out.window_slack = w0.hi - out.half.lo;
    out.separation_bound = gap_between(w0, image(f, w0));
    bool actual_ok = false;
    for (std::size_t i = 0; i < last.leaves.size(); ++i) {
        if (last.leaves[i].id.word.back() == '0') {
            const Rational x = out.representatives[i].first;
            const Rational y = eval_power(f, x, out.separation_time);
            actual_ok = (eval(f, y) - y).abs() >= out.separation_bound;
            break;
        }
    }
    out.separated = actual_ok && out.separation_bound > Rational(0) &&
                    out.separation_bound >= (z - out.half.lo) - out.window_slack;
}

}  // namespace

InvariantScramble build_invariant_via_square(const PLMap& f, unsigned stages, const PieceBudget& budget) {
    if (stages == 0) {
        throw PreconditionError("the invariant construction needs at least one stage");
    }
    const auto cls = classify_conditions(f);
    if (cls.verdict != Verdict::Cond3 || !cls.fixed_point) {
        throw PreconditionError(std::string("invariant construction needs a COND3 map, got ") +
                                verdict_name(cls.verdict));
    }
    const Interval half(f.domain().lo, *cls.fixed_point);
    const PLMap square = iterate(f, 2, budget);
    if (!half.contains(image(square, half))) {
        throw HypothesisFailed("the square does not map " + half.str() + " into itself");
    }
    ScrambleConfig cfg(restrict_to(square, half));
    cfg.stages = stages;
    cfg.budget = budget;
    InvariantScramble out{*cls.fixed_point, half, build_scramble(cfg), {}, {}, {}, false, {}, false, 0, {}, {}, false, false};
    const PLMap& g = out.base.config.f;

    for (const auto& leaf : out.base.stages.back().leaves) {
        std::optional<std::pair<Rational, unsigned>> rep;
        Interval img = leaf.span;
        for (unsigned p = 1; p <= out.base.config.horizon && !rep; ++p) {
            img = image(g, img);
            if (!img.contains(leaf.span)) {
                continue;
            }
            for (const auto& x : isolated_fixed_points(restricted_power(g, leaf.span, p, budget))) {
                if (leaf.span.contains(x)) {
                    rep = std::make_pair(x, p);
                    break;
                }
            }
        }
        if (!rep) {
            throw CoverageTimeout("no periodic point of the square inside " + leaf.id.str());
        }
        out.representatives.push_back(*rep);
    }

    assemble(f, out);
    out.pass = out.invariant && out.straddles && out.separated && verify_certificate(out.base).pass;
    return out;
}

ReplayReport verify_invariant(const PLMap& f, const InvariantScramble& inv) {
    ReplayReport r = verify_certificate(inv.base);
    if (!r.pass) {
        return r;
    }
    auto fail = [&](const std::string& what) {
        r.pass = false;
        r.message = what;
        return r;
    };
    try {
        const auto cls = classify_conditions(f);
        if (cls.verdict != Verdict::Cond3 || cls.fixed_point != inv.fixed_point) {
            return fail("map is not COND3 with fixed point " + inv.fixed_point.short_str());
        }
        if (inv.half != Interval(f.domain().lo, inv.fixed_point)) {
            return fail("half interval does not end at the fixed point");
        }
        if (!(inv.base.config.f == restrict_to(iterate(f, 2, inv.base.config.budget), inv.half))) {
            return fail("base map is not the square restricted to " + inv.half.str());
        }
        const auto& leaves = inv.base.stages.back().leaves;
        if (inv.base.config.stages == 0 || inv.representatives.size() != leaves.size()) {
            return fail("one representative per final leaf expected");
        }
        for (std::size_t i = 0; i < leaves.size(); ++i) {
            const auto& [x, p] = inv.representatives[i];
            if (!leaves[i].span.contains(x) || p == 0 || eval_power(inv.base.config.f, x, p) != x) {
                return fail("representative " + std::to_string(i) + " is not periodic inside " + leaves[i].id.str());
            }
        }
        InvariantScramble again = inv;
        again.base_family.clear();
        again.family.clear();
        again.straddle_times.clear();
        assemble(f, again);
        if (again.base_family != inv.base_family || again.family != inv.family) {
            return fail("recorded family differs from the orbits of the representatives");
        }
        if (again.straddle_times != inv.straddle_times || again.separation_time != inv.separation_time ||
            again.separation_bound != inv.separation_bound || again.window_slack != inv.window_slack) {
            return fail("recorded straddle or separation data differ from the replay");
        }
        if (!again.invariant) {
            return fail("family is not mapped into itself");
        }
        if (!again.straddles) {
            return fail("family does not straddle the fixed point at every odd recorded time");
        }
        if (!again.separated) {
            return fail("separation bound not attained");
        }
        if (inv.invariant != again.invariant || inv.straddles != again.straddles || inv.separated != again.separated ||
            inv.pass != true) {
            return fail("recorded verdict flags differ from the replay");
        }
    } catch (const Error& e) {
        return fail(e.what());
    }
    return r;
}

}  // namespace plcert
