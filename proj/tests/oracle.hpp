#pragma once

// Brute-force reference computations used to check the library. Nothing in
// here calls compose(), preimage() or the periodic solvers.

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "plcert/dsl.hpp"
#include "plcert/plmap.hpp"

namespace oracle {

using plcert::Interval;
using plcert::Node;
using plcert::PLMap;
using plcert::Rational;

inline plcert::PLMap builtin_map(const std::string& name) { return plcert::builtin(name).to_map(); }

/// Uniform rational in [lo, hi] with denominator up to max_den.
inline Rational random_rational(std::mt19937_64& rng, const Rational& lo, const Rational& hi, long max_den = 97) {
    std::uniform_int_distribution<long> den(1, max_den);
    const long d = den(rng);
    std::uniform_int_distribution<long> num(0, d);
    return lo + (hi - lo) * Rational(num(rng), d);
}

inline Interval random_subinterval(std::mt19937_64& rng, const Interval& dom, long max_den = 97) {
    Rational a = random_rational(rng, dom.lo, dom.hi, max_den);
    Rational b = random_rational(rng, dom.lo, dom.hi, max_den);
    while (a == b) {
        b = random_rational(rng, dom.lo, dom.hi, max_den);
    }
    return Interval(plcert::min(a, b), plcert::max(a, b));
}

/// Random self-map of [0, 1] with the given number of pieces.
inline PLMap random_selfmap(std::mt19937_64& rng, int pieces, long max_den = 12) {
    std::set<Rational> xs{Rational(0), Rational(1)};
    while (static_cast<int>(xs.size()) < pieces + 1) {
        xs.insert(random_rational(rng, Rational(0), Rational(1), max_den));
    }
    std::vector<Node> nodes;
    for (const auto& x : xs) {
        nodes.push_back(Node{x, random_rational(rng, Rational(0), Rational(1), max_den)});
    }
    return PLMap(std::move(nodes), Interval(Rational(0), Rational(1)));
}

/// Random Markov self-map of [0, k]: integer nodes, integer values, and every
/// piece rising or falling by at least two so the map is expansive.
inline PLMap random_integer_markov(std::mt19937_64& rng, int k) {
    std::uniform_int_distribution<int> val(0, k);
    for (;;) {
        std::vector<Node> nodes;
        int prev = val(rng);
        nodes.push_back(Node{Rational(0), Rational(prev)});
        bool ok = true;
        for (int i = 1; i <= k && ok; ++i) {
            std::vector<int> choices;
            for (int v = 0; v <= k; ++v) {
                if (std::abs(v - prev) >= 2) {
                    choices.push_back(v);
                }
            }
            if (choices.empty()) {
                ok = false;
                break;
            }
            std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
            prev = choices[pick(rng)];
            nodes.push_back(Node{Rational(i), Rational(prev)});
        }
        if (ok) {
            return PLMap(std::move(nodes), Interval(Rational(0), Rational(k)));
        }
    }
}

/// Direct evaluation by linear scan over pieces.
inline Rational eval_scan(const PLMap& f, const Rational& x) {
    const auto& n = f.nodes();
    for (std::size_t i = 0; i + 1 < n.size(); ++i) {
        if (n[i].x <= x && x <= n[i + 1].x) {
            return n[i].y + (x - n[i].x) * (n[i + 1].y - n[i].y) / (n[i + 1].x - n[i].x);
        }
    }
    throw std::out_of_range("outside domain");
}

inline Rational eval_power(const PLMap& f, Rational x, unsigned n) {
    for (unsigned i = 0; i < n; ++i) {
        x = eval_scan(f, x);
    }
    return x;
}

/// Image by sampling every node of f inside K plus the endpoints, evaluated
/// with eval_scan, applied n times.
inline Interval image_power(const PLMap& f, Interval k, unsigned n) {
    for (unsigned step = 0; step < n; ++step) {
        Rational lo = eval_scan(f, k.lo);
        Rational hi = lo;
        auto add = [&](const Rational& v) {
            lo = plcert::min(lo, v);
            hi = plcert::max(hi, v);
        };
        add(eval_scan(f, k.hi));
        for (const auto& nd : f.nodes()) {
            if (k.lo < nd.x && nd.x < k.hi) {
                add(nd.y);
            }
        }
        k = Interval(lo, hi);
    }
    return k;
}

/// All points x with f^m(x) = x, found by brute force over every symbolic
/// itinerary: each m-fold sequence of pieces is a candidate affine branch.
/// Only isolated solutions are returned.
inline std::set<Rational> periodic_brute(const PLMap& f, unsigned m) {
    std::set<Rational> out;
    const std::size_t r = f.piece_count();
    std::vector<std::size_t> word(m, 0);
    for (;;) {
        // Intersect the cylinder: x in piece w0, f(x) in piece w1, ...
        Rational slope(1), offset(0);
        Rational lo = f.domain().lo, hi = f.domain().hi;
        bool alive = true;
        for (unsigned i = 0; i < m && alive; ++i) {
            const auto& a = f.nodes()[word[i]];
            const auto& b = f.nodes()[word[i] + 1];
            // current value is slope*x + offset; require a.x <= value <= b.x
            if (slope.sign() == 0) {
                if (offset < a.x || b.x < offset) {
                    alive = false;
                }
            } else {
                Rational t0 = (a.x - offset) / slope;
                Rational t1 = (b.x - offset) / slope;
                if (t1 < t0) {
                    std::swap(t0, t1);
                }
                lo = plcert::max(lo, t0);
                hi = plcert::min(hi, t1);
                if (hi < lo) {
                    alive = false;
                }
            }
            const Rational s = (b.y - a.y) / (b.x - a.x);
            const Rational c = a.y - s * a.x;
            offset = s * offset + c;
            slope = s * slope;
        }
        if (alive && slope != Rational(1)) {
            const Rational x = offset / (Rational(1) - slope);
            if (lo <= x && x <= hi) {
                out.insert(x);
            }
        }
        std::size_t i = 0;
        while (i < m && ++word[i] == r) {
            word[i++] = 0;
        }
        if (i == m) {
            break;
        }
    }
    return out;
}

}  // namespace oracle
