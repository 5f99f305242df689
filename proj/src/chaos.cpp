#include "plcert/chaos.hpp"

#include <algorithm>

#include "plcert/errors.hpp"

namespace plcert {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Cond1: return "COND1";
        case Verdict::Cond2: return "COND2";
        case Verdict::Cond3: return "COND3";
        case Verdict::None: return "NONE";
    }
    return "NONE";
}

namespace {

/// Interval with independently open or closed ends; a missing end is infinite.
struct Region {
    std::optional<Rational> lo;
    bool lo_closed = false;
    std::optional<Rational> hi;
    bool hi_closed = false;

    static Region closed(const Rational& a, const Rational& b) { return Region{a, true, b, true}; }

    bool empty() const {
        if (!lo || !hi) {
            return false;
        }
        return *hi < *lo || (*lo == *hi && !(lo_closed && hi_closed));
    }

    /// A deterministic member: a closed end if there is one, else the midpoint.
    Rational pick() const {
        if (lo_closed) {
            return *lo;
        }
        if (hi_closed) {
            return *hi;
        }
        return (*lo + *hi) / Rational(2);
    }
};

Region meet(const Region& a, const Region& b) {
    Region r;
    if (!a.lo || (b.lo && *a.lo < *b.lo)) {
        r.lo = b.lo;
        r.lo_closed = b.lo_closed;
    } else if (b.lo && *a.lo == *b.lo) {
        r.lo = a.lo;
        r.lo_closed = a.lo_closed && b.lo_closed;
    } else {
        r.lo = a.lo;
        r.lo_closed = a.lo_closed;
    }
    if (!a.hi || (b.hi && *b.hi < *a.hi)) {
        r.hi = b.hi;
        r.hi_closed = b.hi_closed;
    } else if (b.hi && *a.hi == *b.hi) {
        r.hi = a.hi;
        r.hi_closed = a.hi_closed && b.hi_closed;
    } else {
        r.hi = a.hi;
        r.hi_closed = a.hi_closed;
    }
    return r;
}

enum class Rel { Le, Lt, Ge, Gt };

bool holds(int sign, Rel rel) {
    switch (rel) {
        case Rel::Le: return sign <= 0;
        case Rel::Lt: return sign < 0;
        case Rel::Ge: return sign >= 0;
        case Rel::Gt: return sign > 0;
    }
    return false;
}

/// Points of [x0, x1] where the affine function through (x0, g0), (x1, g1)
/// stands in relation `rel` to zero. May be empty.
Region affine_region(const Rational& x0, const Rational& x1, const Rational& g0, const Rational& g1, Rel rel) {
    const Region piece = Region::closed(x0, x1);
    if (g0 == g1) {
        return holds(g0.sign(), rel) ? piece : Region{x1, false, x0, false};
    }
    const Rational root = x0 + g0 * (x1 - x0) / (g0 - g1);
    const bool increasing = g0 < g1;
    const bool strict = rel == Rel::Lt || rel == Rel::Gt;
    const bool below = (rel == Rel::Le || rel == Rel::Lt) == increasing;
    Region half;
    if (below) {
        half.hi = root;
        half.hi_closed = !strict;
    } else {
        half.lo = root;
        half.lo_closed = !strict;
    }
    return meet(piece, half);
}

/// Points where f(x) - x stands in relation rel to zero, within bounds.
std::optional<Rational> search_displacement(const PLMap& f, const Region& bounds, Rel rel,
                                            const std::optional<std::pair<Rational, Rel>>& extra) {
    for (std::size_t i = 0; i < f.piece_count(); ++i) {
        const Piece p = f.piece(i);
        Region r = meet(Region::closed(p.x0, p.x1), bounds);
        if (r.empty()) {
            continue;
        }
        r = meet(r, affine_region(p.x0, p.x1, p.y0 - p.x0, p.y1 - p.x1, rel));
        if (extra && !r.empty()) {
            r = meet(r, affine_region(p.x0, p.x1, p.y0 - extra->first, p.y1 - extra->first, extra->second));
        }
        if (!r.empty()) {
            return r.pick();
        }
    }
    return std::nullopt;
}

}  // namespace

ConditionClassification classify_conditions(const PLMap& f) {
    if (!f.is_self_map()) {
        throw DomainError("classification needs a self-map");
    }
    ConditionClassification out;
    const auto fixed = fixed_points(f);
    const Interval dom = f.domain();
    for (const auto& s : fixed) {
        if (s.kind == FixedKind::Segment) {
            out.verdict = Verdict::None;
            out.note = "fixed segment " + s.where.str() + ": uniqueness of the fixed point is undefined";
            for (const auto& t : fixed) {
                if (t.kind == FixedKind::Isolated && dom.contains_in_interior(t.where.lo)) {
                    out.interior_fixed.push_back(t.where.lo);
                }
            }
            return out;
        }
        if (dom.contains_in_interior(s.where.lo)) {
            out.interior_fixed.push_back(s.where.lo);
        }
    }
    if (out.interior_fixed.empty()) {
        throw NoInteriorFixedPoint("no fixed point in the interior of " + dom.str());
    }

    for (const auto& z : out.interior_fixed) {
        const Region left{dom.lo, true, z, false};
        const Region right{z, false, dom.hi, true};
        auto c = search_displacement(f, left, Rel::Le, std::nullopt);
        if (!c) {
            c = search_displacement(f, right, Rel::Ge, std::nullopt);
        }
        if (c) {
            out.verdict = Verdict::Cond1;
            out.fixed_point = z;
            out.witness = c;
            return out;
        }
    }
    for (const auto& z : out.interior_fixed) {
        const Region left{dom.lo, true, z, false};
        const Region right{z, false, dom.hi, true};
        auto c = search_displacement(f, left, Rel::Gt, std::make_pair(z, Rel::Lt));
        if (!c) {
            c = search_displacement(f, right, Rel::Lt, std::make_pair(z, Rel::Gt));
        }
        if (c) {
            out.verdict = Verdict::Cond2;
            out.fixed_point = z;
            out.witness = c;
            return out;
        }
    }
    if (fixed.size() == 1) {
        const Rational z = out.interior_fixed.front();
        std::vector<SignCertificate> signs;
        bool ok = true;
        for (std::size_t i = 0; i < f.piece_count() && ok; ++i) {
            const Piece p = f.piece(i);
            if (p.x0 < z) {
                const Interval span(p.x0, min(p.x1, z));
                const Rational lo = min(eval(f, span.lo), eval(f, span.hi));
                ok = ok && z <= lo;
                signs.push_back(SignCertificate{span, true, lo});
            }
            if (z < p.x1) {
                const Interval span(max(p.x0, z), p.x1);
                const Rational hi = max(eval(f, span.lo), eval(f, span.hi));
                ok = ok && hi <= z;
                signs.push_back(SignCertificate{span, false, hi});
            }
        }
        if (ok) {
            out.verdict = Verdict::Cond3;
            out.fixed_point = z;
            out.signs = std::move(signs);
            return out;
        }
    }
    out.verdict = Verdict::None;
    out.note = "no witness for any of the three conditions";
    return out;
}

bool recheck(const PLMap& f, const ConditionClassification& c) {
    if (c.verdict == Verdict::None) {
        return true;
    }
    if (!c.fixed_point || eval(f, *c.fixed_point) != *c.fixed_point) {
        return false;
    }
    const Rational& z = *c.fixed_point;
    if (c.verdict == Verdict::Cond3) {
        if (fixed_points(f).size() != 1) {
            return false;
        }
        for (const auto& s : c.signs) {
            const Interval img = image(f, s.span);
            if (s.left_of_fixed ? (img.lo != s.bound || s.bound < z) : (img.hi != s.bound || z < s.bound)) {
                return false;
            }
        }
        return true;
    }
    if (!c.witness) {
        return false;
    }
    const Rational& x = *c.witness;
    const Rational fx = eval(f, x);
    if (x == z) {
        return false;
    }
    if (c.verdict == Verdict::Cond1) {
        return (fx <= x && x < z) || (z < x && x <= fx);
    }
    return (x < fx && fx < z) || (z < fx && fx < x);
}

bool verify_pair(const PLMap& f, const TurbulencePair& p, const std::optional<Interval>& host) {
    if (p.j0.overlaps_interior(p.j1) || p.j0.is_point() || p.j1.is_point()) {
        return false;
    }
    if (host && (!host->contains(p.j0) || !host->contains(p.j1))) {
        return false;
    }
    const Interval i0 = image(f, p.j0);
    const Interval i1 = image(f, p.j1);
    return i0 == p.image0 && i1 == p.image1 && i0.contains(p.j0) && i0.contains(p.j1) && i1.contains(p.j0) &&
           i1.contains(p.j1);
}

bool verify_certificate(const PLMap& f, const TurbulenceCertificate& c) {
    if (c.level == TurbulenceLevel::Turbulent) {
        return verify_pair(f, c.pair);
    }
    if (!c.host0 || !c.host1 || !c.pair1 || c.host0->overlaps_interior(*c.host1)) {
        return false;
    }
    return verify_pair(f, c.pair, c.host0) && verify_pair(f, *c.pair1, c.host1);
}

namespace {

TurbulencePair make_pair(const PLMap& f, Interval j0, Interval j1) {
    Interval i0 = image(f, j0);
    Interval i1 = image(f, j1);
    return TurbulencePair{std::move(j0), std::move(j1), std::move(i0), std::move(i1)};
}

/// Leftmost node-or-endpoint location of the extreme value of f on k.
Rational extreme_location(const PLMap& f, const Interval& k, bool maximum) {
    Rational best_x = k.lo;
    Rational best_y = eval(f, k.lo);
    auto consider = [&](const Rational& x, const Rational& y) {
        if (maximum ? best_y < y : y < best_y) {
            best_x = x;
            best_y = y;
        }
    };
    for (const auto& n : f.nodes()) {
        if (k.contains_in_interior(n.x)) {
            consider(n.x, n.y);
        }
    }
    consider(k.hi, eval(f, k.hi));
    return best_x;
}

std::optional<TurbulencePair> constructive(const PLMap& f) {
    for (const auto& z : isolated_fixed_points(f)) {
        const auto pre = preimage(f, Interval::point(z));
        // Left of z: nearest preimages first.
        for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
            if (!(it->hi < z)) {
                continue;
            }
            const Rational d = it->hi;
            const Rational b = extreme_location(f, Interval(d, z), false);
            if (eval(f, b) <= d) {
                auto pair = make_pair(f, Interval(d, b), Interval(b, z));
                if (verify_pair(f, pair)) {
                    return pair;
                }
            }
        }
        for (const auto& comp : pre) {
            if (!(z < comp.lo)) {
                continue;
            }
            const Rational d = comp.lo;
            const Rational b = extreme_location(f, Interval(z, d), true);
            if (d <= eval(f, b)) {
                auto pair = make_pair(f, Interval(z, b), Interval(b, d));
                if (verify_pair(f, pair)) {
                    return pair;
                }
            }
        }
    }
    return std::nullopt;
}

/// A point of the open interval (lo, hi) inside some component, if any.
std::optional<Rational> point_inside(const std::vector<Interval>& comps, const Rational& lo, const Rational& hi) {
    for (const auto& c : comps) {
        if (!(lo < c.hi && c.lo < hi)) {
            continue;
        }
        if (lo < c.lo) {
            return c.lo;
        }
        if (c.hi < hi) {
            return c.hi;
        }
        return (lo + hi) / Rational(2);
    }
    return std::nullopt;
}

/// Certificate from points a, b, c with f(a) = a = f(b), f(c) = b and c
/// strictly between a and b.
struct Triple {
    Rational a, b, c;

    Interval hull() const { return Interval(min(a, b), max(a, b)); }
};

/// Every triple whose b is the endpoint of a component of f^{-1}(a) nearest
/// to a. This covers all turbulent configurations, since moving b toward a
/// inside a component only helps.
std::vector<Triple> triples(const PLMap& f) {
    std::vector<Triple> out;
    for (const auto& a : isolated_fixed_points(f)) {
        for (const auto& comp : preimage(f, Interval::point(a))) {
            if (a < comp.lo) {
                const Rational b = comp.lo;
                if (b <= image(f, Interval(a, b)).hi) {
                    if (auto c = point_inside(preimage(f, Interval::point(b)), a, b)) {
                        out.push_back(Triple{a, b, *c});
                    }
                }
            } else if (comp.hi < a) {
                const Rational b = comp.hi;
                if (image(f, Interval(b, a)).lo <= b) {
                    if (auto c = point_inside(preimage(f, Interval::point(b)), b, a)) {
                        out.push_back(Triple{a, b, *c});
                    }
                }
            }
        }
    }
    return out;
}

TurbulencePair pair_from(const PLMap& f, const Triple& t) {
    const Interval h = t.hull();
    return make_pair(f, Interval(h.lo, t.c), Interval(t.c, h.hi));
}

}  // namespace

TurbulenceResult find_turbulence(const PLMap& f) {
    if (!f.is_self_map()) {
        throw DomainError("turbulence search needs a self-map");
    }
    if (auto pair = constructive(f)) {
        TurbulenceCertificate c;
        c.pair = *pair;
        c.method = "fixed-point construction";
        return c;
    }
    for (const auto& t : triples(f)) {
        auto pair = pair_from(f, t);
        if (verify_pair(f, pair)) {
            TurbulenceCertificate c;
            c.pair = std::move(pair);
            c.method = "exhaustive characterization";
            return c;
        }
    }
    const bool exhaustive = !has_fixed_segment(f);
    return TurbulenceNotFound{exhaustive, exhaustive ? "no fixed point a, preimage b and point c between them "
                                                       "with f(c) = b: the map is not turbulent"
                                                     : "fixed segment present: search is not exhaustive"};
}

TurbulenceResult find_double_turbulence(const PLMap& f) {
    if (!f.is_self_map()) {
        throw DomainError("turbulence search needs a self-map");
    }
    auto ts = triples(f);
    std::sort(ts.begin(), ts.end(), [](const Triple& x, const Triple& y) {
        const Interval hx = x.hull(), hy = y.hull();
        if (hx.lo != hy.lo) {
            return hx.lo < hy.lo;
        }
        if (hx.hi != hy.hi) {
            return hx.hi < hy.hi;
        }
        return x.c < y.c;
    });
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = i + 1; j < ts.size(); ++j) {
            const Interval h0 = ts[i].hull(), h1 = ts[j].hull();
            if (h0.overlaps_interior(h1)) {
                continue;
            }
            TurbulenceCertificate c;
            c.level = TurbulenceLevel::DoublyTurbulent;
            c.pair = pair_from(f, ts[i]);
            c.pair1 = pair_from(f, ts[j]);
            c.host0 = h0;
            c.host1 = h1;
            c.method = "exhaustive characterization";
            if (verify_certificate(f, c)) {
                return c;
            }
        }
    }
    const bool exhaustive = !has_fixed_segment(f);
    return TurbulenceNotFound{exhaustive, exhaustive ? "no two turbulent hosts meeting in at most one point"
                                                     : "fixed segment present: search is not exhaustive"};
}

InvariantHalvesReport check_invariant_halves(const PLMap& f, const Interval& k, unsigned s) {
    if (!f.is_self_map()) {
        throw DomainError("needs a self-map");
    }
    if (s == 0) {
        throw DomainError("s must be positive");
    }
    InvariantHalvesReport r;
    Interval img = k;
    for (unsigned i = 0; i < s; ++i) {
        img = image(f, img);
    }
    r.iterate_image = img;
    if (!k.contains(img)) {
        throw HypothesisFailed("f^" + std::to_string(s) + "(K) = " + img.str() + " is not inside K = " + k.str());
    }
    auto twice = [&](const Interval& j) { return image(f, image(f, j)); };
    r.image_twice = twice(k);
    r.k_invariant = r.image_twice == k;
    r.pass = r.k_invariant;
    const Interval dom = f.domain();
    std::vector<Interval> comps;
    if (dom.lo < k.lo) {
        comps.emplace_back(dom.lo, k.lo);
    }
    if (k.hi < dom.hi) {
        comps.emplace_back(k.hi, dom.hi);
    }
    for (const auto& c : comps) {
        const Interval t = twice(c);
        r.components.push_back(ComponentCheck{c, t, t == c});
        r.pass = r.pass && t == c;
    }
    return r;
}

}  // namespace plcert
