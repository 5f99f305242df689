#include "plcert/orbits.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "plcert/errors.hpp"
#include "plcert/markov.hpp"

namespace plcert {

const char* strategy_name(SolveStrategy s) {
    switch (s) {
        case SolveStrategy::Auto: return "auto";
        case SolveStrategy::Direct: return "direct";
        case SolveStrategy::Cylinder: return "cylinder";
    }
    return "auto";
}

std::vector<Rational> PeriodicPoints::points() const {
    std::vector<Rational> out;
    for (const auto& o : orbits) {
        out.insert(out.end(), o.points.begin(), o.points.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

unsigned least_period(const PLMap& f, const Rational& x, unsigned m) {
    Rational y = x;
    for (unsigned d = 1; d <= m; ++d) {
        y = eval(f, y);
        if (m % d == 0 && y == x) {
            return d;
        }
    }
    throw PreconditionError(x.short_str() + " is not fixed by f^" + std::to_string(m));
}

namespace {

PeriodicPoints group(const PLMap& f, unsigned m, const std::set<Rational>& isolated,
                     const std::vector<Interval>& segments, SolveStrategy used) {
    PeriodicPoints out;
    out.m = m;
    out.used = used;
    std::set<Rational> seen;
    // Ascending iteration makes the first visited point of each orbit its least.
    for (const auto& x : isolated) {
        if (seen.count(x)) {
            continue;
        }
        PeriodicOrbit o;
        o.least_period = least_period(f, x, m);
        Rational y = x;
        for (unsigned i = 0; i < o.least_period; ++i) {
            o.points.push_back(y);
            seen.insert(y);
            y = eval(f, y);
        }
        out.orbits.push_back(std::move(o));
    }
    for (const auto& s : merge_touching(segments)) {
        if (s.is_point()) {
            continue;
        }
        out.segments.push_back(PeriodicSegment{s, least_period(f, s.midpoint(), m)});
    }
    return out;
}

PeriodicPoints solve_direct(const PLMap& f, unsigned m, const PieceBudget& budget) {
    const PLMap fm = iterate(f, m, budget);
    std::set<Rational> isolated;
    std::vector<Interval> segments;
    for (const auto& s : fixed_points(fm)) {
        if (s.kind == FixedKind::Isolated) {
            isolated.insert(s.where.lo);
        } else {
            segments.push_back(s.where);
        }
    }
    return group(f, m, isolated, segments, SolveStrategy::Direct);
}

PeriodicPoints solve_cylinder(const PLMap& f, const MarkovPartition& p, unsigned m, const PieceBudget& budget) {
    std::set<Rational> isolated;
    std::vector<Interval> segments;
    for_each_closed_walk(p, m, budget.max_pieces, [&](const WalkSolution& s) {
        if (s.segment) {
            segments.push_back(s.fixed);
        } else {
            isolated.insert(s.fixed.lo);
        }
    });
    for (const auto& c : periodic_cuts(p, m)) {
        isolated.insert(c);
    }
    // Points lying inside a segment are not isolated.
    const auto merged = merge_touching(segments);
    for (auto it = isolated.begin(); it != isolated.end();) {
        const bool inside = std::any_of(merged.begin(), merged.end(), [&](const Interval& k) { return k.contains(*it); });
        it = inside ? isolated.erase(it) : std::next(it);
    }
    return group(f, m, isolated, merged, SolveStrategy::Cylinder);
}

std::optional<MarkovPartition> markov_for(const PLMap& f) {
    auto res = detect_markov(f, 256);
    if (auto* p = std::get_if<MarkovPartition>(&res)) {
        return std::move(*p);
    }
    return std::nullopt;
}

}  // namespace

PeriodicPoints periodic_points(const PLMap& f, unsigned m, const PieceBudget& budget, SolveStrategy strategy) {
    if (m == 0) {
        throw DomainError("period must be positive");
    }
    if (!f.is_self_map()) {
        throw DomainError("periodic points need a self-map");
    }
    budget.validate();
    if (strategy == SolveStrategy::Direct) {
        return solve_direct(f, m, budget);
    }
    const auto p = markov_for(f);
    if (strategy == SolveStrategy::Cylinder) {
        if (!p) {
            throw PreconditionError("cylinder strategy needs a Markov partition");
        }
        return solve_cylinder(f, *p, m, budget);
    }
    const bool prefer_cylinder = p && p->expansive;
    try {
        return prefer_cylinder ? solve_cylinder(f, *p, m, budget) : solve_direct(f, m, budget);
    } catch (const BudgetExceeded&) {
        if (prefer_cylinder) {
            return solve_direct(f, m, budget);
        }
        if (p) {
            return solve_cylinder(f, *p, m, budget);
        }
        throw;
    }
}

bool PeriodSpectrum::complete() const {
    return std::all_of(covered.begin(), covered.end(), [](bool b) { return b; });
}

PeriodSpectrum period_spectrum(const PLMap& f, unsigned max_period, const PieceBudget& budget,
                               SolveStrategy strategy) {
    PeriodSpectrum s;
    s.max_checked = max_period;
    s.covered.assign(max_period, false);
    for (unsigned m = 1; m <= max_period; ++m) {
        try {
            const auto pts = periodic_points(f, m, budget, strategy);
            s.covered[m - 1] = true;
            std::size_t n = 0;
            for (const auto& o : pts.orbits) {
                n += o.least_period == m ? 1 : 0;
            }
            if (n > 0) {
                s.present.insert(m);
                s.counts[m] = n;
            }
            for (const auto& seg : pts.segments) {
                s.segment_periods.insert(seg.least_period);
            }
        } catch (const BudgetExceeded&) {
            s.covered[m - 1] = false;
        }
    }
    return s;
}

PeriodForcingReport verify_period_forcing(const PLMap& f, unsigned max_period, const PieceBudget& budget) {
    PeriodForcingReport r;
    r.classification = classify_conditions(f);
    if (r.classification.verdict == Verdict::None) {
        throw ClassificationUnavailable("no condition verdict: " + r.classification.note);
    }
    r.spectrum = period_spectrum(f, max_period, budget);
    const bool all = r.classification.verdict == Verdict::Cond1;
    for (unsigned m = 1; m <= max_period; ++m) {
        if (all || m % 2 == 0) {
            r.required.push_back(m);
            if (!r.spectrum.present.count(m)) {
                r.missing.push_back(m);
            }
        }
        if (m % 2 == 1 && m > 1 && r.spectrum.present.count(m)) {
            r.odd_present.push_back(m);
        }
    }
    r.pass = r.missing.empty() && r.spectrum.complete();
    std::ostringstream os;
    os << verdict_name(r.classification.verdict) << ": requires " << (all ? "all periods" : "all even periods")
       << " up to " << max_period << "; " << (r.pass ? "PASS" : "FAIL");
    if (!r.missing.empty()) {
        os << " (missing";
        for (auto m : r.missing) {
            os << ' ' << m;
        }
        os << ')';
    }
    r.summary = os.str();
    return r;
}

namespace {

std::tuple<int, unsigned, unsigned> sharkovsky_key(unsigned n) {
    unsigned k = 0;
    while (n % 2 == 0) {
        n /= 2;
        ++k;
    }
    if (n > 1) {
        return {0, k, n};
    }
    // Powers of two come last, in decreasing order.
    return {1, ~k, 0};
}

}  // namespace

bool sharkovsky_precedes(unsigned a, unsigned b) {
    if (a == 0 || b == 0) {
        throw DomainError("periods are positive");
    }
    return sharkovsky_key(a) < sharkovsky_key(b);
}

bool sharkovsky_tail_check(const PeriodSpectrum& s) {
    for (unsigned p : s.present) {
        if (p > s.max_checked) {
            continue;
        }
        for (unsigned q = 1; q <= s.max_checked; ++q) {
            if (s.covered.size() >= q && !s.covered[q - 1]) {
                continue;
            }
            if (sharkovsky_precedes(p, q) && !s.present.count(q)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace plcert
